//! JSON reports with provenance, and the FMR-curve CSV.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "lfa";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// An input file and the bytes that were read from it.
pub type FileBytes = (PathBuf, Vec<u8>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        Self {
            path: path.display().to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }

    pub fn all(files: &[FileBytes]) -> Vec<Self> {
        files.iter().map(|(p, b)| Self::of(p, b)).collect()
    }
}

/// Every report carries the tool version, the fully resolved configuration
/// and digests of its inputs, so a run can be checked and replayed.
#[derive(Debug, Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub inputs: &'a [InputDigest],
    pub result: &'a R,
}

impl<'a, C: Serialize, R: Serialize> Report<'a, C, R> {
    pub fn new(command: &'a str, config: &'a C, inputs: &'a [InputDigest], result: &'a R) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            config,
            inputs,
            result,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::runtime("cli::Serialize", e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

/// Parses a JSON file, returning its raw bytes too.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<(T, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| CliError::read(path, e))?;
    let value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::validation("cli::InvalidJson", format!("{}: {e}", path.display())))?;
    Ok((value, bytes))
}

/// `threshold,<group>...`, one row per threshold.
pub fn write_fmr_curves(path: &Path, thresholds: &[f64], curves: &[(String, Vec<f64>)]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    let fail = |e: csv::Error| CliError::write(path, e);
    let mut header = vec!["threshold".to_string()];
    header.extend(curves.iter().map(|(n, _)| n.clone()));
    w.write_record(&header).map_err(fail)?;
    for (k, t) in thresholds.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(curves.iter().map(|(_, c)| c[k].to_string()));
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}
