//! Latent directions as a raw `f32` blob described by a JSON manifest.

use std::fs;
use std::path::Path;

use lfa_core::LatentDirection;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::format::report::{read_json, write_json, FileBytes};

pub const BLOB_FILE: &str = "directions.bin";
pub const MANIFEST_FILE: &str = "directions.json";
pub const ENCODING: &str = "f32-le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionEntry {
    /// Direction id, referenced by `traverse --direction`.
    pub id: String,
    /// Row of this direction inside the blob.
    pub row: usize,
    pub source_group_size: usize,
    pub source_identity_count: usize,
    /// Norm of the stored (unnormalized) vector.
    pub norm: f64,
    /// Threshold the source group was grown with.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionManifest {
    pub encoding: String,
    /// Blob file name, relative to the manifest.
    pub file: String,
    pub dim: usize,
    pub count: usize,
    pub directions: Vec<DirectionEntry>,
}

fn invalid(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::validation("cli::InvalidDirectionFile", format!("{}: {msg}", path.display()))
}

/// Writes `directions.bin` and `directions.json` into `dir`.
pub fn write_directions(dir: &Path, dim: usize, entries: &[(String, LatentDirection, Option<f64>)]) -> CliResult<()> {
    let mut blob = Vec::with_capacity(4 * dim * entries.len());
    let mut directions = Vec::with_capacity(entries.len());
    for (row, (id, v, threshold)) in entries.iter().enumerate() {
        for &x in v.components() {
            blob.extend_from_slice(&(x as f32).to_le_bytes());
        }
        directions.push(DirectionEntry {
            id: id.clone(),
            row,
            source_group_size: v.source_group_size(),
            source_identity_count: v.source_identity_count(),
            norm: v.norm(),
            threshold: *threshold,
        });
    }
    let blob_path = dir.join(BLOB_FILE);
    fs::write(&blob_path, blob).map_err(|e| CliError::write(&blob_path, e))?;
    let manifest = DirectionManifest {
        encoding: ENCODING.into(),
        file: BLOB_FILE.into(),
        dim,
        count: entries.len(),
        directions,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)
}

/// Loads one direction by id. Returns it with the bytes of the manifest
/// and blob for hashing.
pub fn read_direction(manifest_path: &Path, id: &str) -> CliResult<(LatentDirection, Vec<FileBytes>)> {
    let (manifest, manifest_bytes): (DirectionManifest, Vec<u8>) = read_json(manifest_path)?;
    if manifest.encoding != ENCODING {
        return Err(invalid(
            manifest_path,
            format!("unsupported encoding {:?}", manifest.encoding),
        ));
    }
    let blob_path = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&manifest.file);
    let blob = fs::read(&blob_path).map_err(|e| CliError::read(&blob_path, e))?;
    let expected = 4 * manifest.dim * manifest.count;
    if blob.len() != expected {
        return Err(invalid(
            &blob_path,
            format!(
                "expected {expected} bytes ({} x {} x 4), found {}",
                manifest.count,
                manifest.dim,
                blob.len()
            ),
        ));
    }
    let entry = manifest.directions.iter().find(|e| e.id == id).ok_or_else(|| {
        CliError::validation(
            "cli::UnknownDirection",
            format!("no direction {id:?} in {}", manifest_path.display()),
        )
    })?;
    if entry.row >= manifest.count {
        return Err(invalid(
            manifest_path,
            format!("direction {id:?} points at row {}", entry.row),
        ));
    }
    let start = 4 * manifest.dim * entry.row;
    let components = blob[start..start + 4 * manifest.dim]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let v = LatentDirection::new(components, entry.source_group_size, entry.source_identity_count)?;
    Ok((
        v,
        vec![(manifest_path.to_path_buf(), manifest_bytes), (blob_path, blob)],
    ))
}
