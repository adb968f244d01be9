//! `LFAE` binary embeddings plus the `ids.csv` sidecar.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                   |
//! |--------|------|-------------------------|
//! | 0      | 4    | magic `LFAE`            |
//! | 4      | 4    | format version (`u32`)  |
//! | 8      | 8    | row count `N` (`u64`)   |
//! | 16     | 4    | dimension `d` (`u32`)   |
//! | 20     | 4·N·d| `f32` rows, row-major   |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lfa_core::EmbeddingDataset;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::format::report::FileBytes;

pub const MAGIC: &[u8; 4] = b"LFAE";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

/// File names inside a dataset directory.
pub const EMBEDDINGS_FILE: &str = "embeddings.lfae";
pub const IDS_FILE: &str = "ids.csv";

fn invalid(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::validation("cli::InvalidEmbeddingFile", format!("{}: {msg}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u32,
    pub rows: u64,
    pub dim: u32,
}

impl Header {
    /// Total file length implied by the header, if it fits in `u64`.
    pub fn expected_len(&self) -> Option<u64> {
        self.rows
            .checked_mul(self.dim as u64)?
            .checked_mul(4)?
            .checked_add(HEADER_LEN as u64)
    }
}

/// Parses and checks the fixed header against the total byte count.
pub fn parse_header(path: &Path, bytes: &[u8]) -> CliResult<Header> {
    if bytes.len() < HEADER_LEN {
        return Err(invalid(
            path,
            format!(
                "file has {} bytes, shorter than the {HEADER_LEN}-byte header",
                bytes.len()
            ),
        ));
    }
    if &bytes[..4] != MAGIC {
        return Err(invalid(path, format!("bad magic {:?}, expected \"LFAE\"", &bytes[..4])));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(invalid(path, format!("unsupported format version {version}")));
    }
    let h = Header {
        version,
        rows: u64::from_le_bytes(bytes[8..16].try_into().unwrap()),
        dim: u32::from_le_bytes(bytes[16..20].try_into().unwrap()),
    };
    let expected = h
        .expected_len()
        .ok_or_else(|| invalid(path, format!("header N={} d={} overflows", h.rows, h.dim)))?;
    if expected != bytes.len() as u64 {
        return Err(invalid(
            path,
            format!(
                "expected {expected} bytes ({HEADER_LEN}-byte header + {} x {} x 4), found {}",
                h.rows,
                h.dim,
                bytes.len()
            ),
        ));
    }
    Ok(h)
}

/// Decodes the `f32` payload after a validated header.
pub fn decode_rows(path: &Path, bytes: &[u8]) -> CliResult<(Header, Vec<f64>)> {
    let h = parse_header(path, bytes)?;
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok((h, data))
}

pub fn encode_rows(rows: usize, dim: usize, data: &[f64]) -> Vec<u8> {
    debug_assert_eq!(data.len(), rows * dim);
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for &x in data {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    out
}

#[derive(Debug, Deserialize)]
struct IdRow {
    image_id: String,
    identity: String,
}

pub fn read_ids(path: &Path) -> CliResult<(Vec<String>, Vec<String>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    let headers = rdr.headers().map_err(|e| CliError::read(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["image_id", "identity"] {
        return Err(invalid(path, "header must be exactly `image_id,identity`"));
    }
    let (mut ids, mut keys) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.deserialize::<IdRow>().enumerate() {
        let rec = rec.map_err(|e| invalid(path, format!("row {}: {e}", line + 1)))?;
        ids.push(rec.image_id);
        keys.push(rec.identity);
    }
    Ok((ids, keys))
}

pub fn write_ids(path: &Path, ids: &[String], keys: &[String]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    w.write_record(["image_id", "identity"])
        .map_err(|e| CliError::write(path, e))?;
    for (id, key) in ids.iter().zip(keys) {
        w.write_record([id, key]).map_err(|e| CliError::write(path, e))?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

pub fn embeddings_path(dir: &Path) -> PathBuf {
    dir.join(EMBEDDINGS_FILE)
}

pub fn ids_path(dir: &Path) -> PathBuf {
    dir.join(IDS_FILE)
}

/// Loads a dataset directory. Returns the dataset and the raw bytes of both
/// files so callers can hash them.
pub fn load_dataset(dir: &Path) -> CliResult<(EmbeddingDataset, Vec<FileBytes>)> {
    let emb = embeddings_path(dir);
    let bytes = fs::read(&emb).map_err(|e| CliError::read(&emb, e))?;
    let (h, data) = decode_rows(&emb, &bytes)?;
    let ids_file = ids_path(dir);
    let id_bytes = fs::read(&ids_file).map_err(|e| CliError::read(&ids_file, e))?;
    let (ids, keys) = read_ids(&ids_file)?;
    if ids.len() as u64 != h.rows {
        return Err(invalid(
            &ids_file,
            format!("{} id rows for {} embeddings", ids.len(), h.rows),
        ));
    }
    let ds = EmbeddingDataset::new(ids, &keys, data, h.dim as usize)
        .map_err(|e| CliError::validation(e.code(), format!("{}: {e}", emb.display())))?;
    Ok((ds, vec![(emb, bytes), (ids_file, id_bytes)]))
}

/// Writes a dataset directory from rows and identity keys.
pub fn write_dataset(dir: &Path, ids: &[String], keys: &[String], dim: usize, data: &[f64]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    let emb = embeddings_path(dir);
    let mut f = fs::File::create(&emb).map_err(|e| CliError::write(&emb, e))?;
    f.write_all(&encode_rows(ids.len(), dim, data))
        .map_err(|e| CliError::write(&emb, e))?;
    write_ids(&ids_path(dir), ids, keys)
}

/// Writes an existing dataset back out.
pub fn save_dataset(dir: &Path, ds: &EmbeddingDataset) -> CliResult<()> {
    let keys: Vec<String> = ds
        .identities()
        .iter()
        .map(|&l| ds.identity_key(l).to_string())
        .collect();
    write_dataset(dir, ds.image_ids(), &keys, ds.dim(), ds.data())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let bytes = encode_rows(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.6, 0.8]);
        assert_eq!(bytes.len(), 20 + 24);
        let (h, data) = decode_rows(Path::new("x"), &bytes).unwrap();
        assert_eq!(
            h,
            Header {
                version: 1,
                rows: 2,
                dim: 3
            }
        );
        assert_eq!(data[4], 0.6f32 as f64);
    }

    #[test]
    fn truncation_reports_byte_counts() {
        let bytes = encode_rows(2, 3, &[1.0; 6]);
        let err = parse_header(Path::new("x"), &bytes[..bytes.len() - 1]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("expected 44 bytes"), "{err}");
        assert!(err.to_string().contains("found 43"), "{err}");
        assert!(parse_header(Path::new("x"), &bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(parse_header(Path::new("x"), &bad).is_err());
    }
}
