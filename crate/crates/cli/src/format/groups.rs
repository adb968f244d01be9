//! Group membership CSV: `group_id,image_id,insertion_rank`.

use std::collections::HashMap;
use std::path::Path;

use lfa_core::{EmbeddingDataset, Group, SeedProvenance};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// A group read from or written to disk, keyed by its file id.
#[derive(Debug, Clone)]
pub struct NamedGroup {
    pub id: String,
    pub group: Group,
}

fn invalid(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::validation("cli::InvalidGroupFile", format!("{}: {msg}", path.display()))
}

#[derive(Debug, Deserialize)]
struct Row {
    group_id: String,
    image_id: String,
    insertion_rank: usize,
}

/// Reads groups in order of first appearance; members are ordered by rank,
/// which must run `0..len` within each group.
pub fn read_groups(path: &Path, ds: &EmbeddingDataset, provenance: SeedProvenance) -> CliResult<Vec<NamedGroup>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    let headers = rdr.headers().map_err(|e| CliError::read(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["group_id", "image_id", "insertion_rank"] {
        return Err(invalid(
            path,
            "header must be exactly `group_id,image_id,insertion_rank`",
        ));
    }
    let mut order: Vec<String> = Vec::new();
    let mut slots: HashMap<String, Vec<(usize, usize)>> = HashMap::new();
    for (line, rec) in rdr.deserialize::<Row>().enumerate() {
        let rec = rec.map_err(|e| invalid(path, format!("row {}: {e}", line + 1)))?;
        let index = ds.index_of(&rec.image_id).ok_or_else(|| {
            invalid(
                path,
                format!("row {}: image {:?} is not in the dataset", line + 1, rec.image_id),
            )
        })?;
        if !slots.contains_key(&rec.group_id) {
            order.push(rec.group_id.clone());
        }
        slots.entry(rec.group_id).or_default().push((rec.insertion_rank, index));
    }
    order
        .into_iter()
        .map(|id| {
            let mut members = slots.remove(&id).unwrap();
            members.sort_unstable();
            if members.iter().enumerate().any(|(k, &(r, _))| r != k) {
                return Err(invalid(
                    path,
                    format!("group {id:?}: ranks are not 0..{}", members.len()),
                ));
            }
            let group = Group::new(members.into_iter().map(|(_, i)| i).collect(), provenance)
                .map_err(|e| invalid(path, format!("group {id:?}: {e}")))?;
            Ok(NamedGroup { id, group })
        })
        .collect()
}

pub fn write_groups(path: &Path, ds: &EmbeddingDataset, groups: &[NamedGroup]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    let fail = |e: csv::Error| CliError::write(path, e);
    w.write_record(["group_id", "image_id", "insertion_rank"])
        .map_err(fail)?;
    for g in groups {
        for (rank, &m) in g.group.members().iter().enumerate() {
            w.write_record([g.id.as_str(), ds.image_id(m), &rank.to_string()])
                .map_err(fail)?;
        }
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

/// Zero-padded ids `g0000`, `g0001`, ... for freshly produced groups.
pub fn numbered(groups: Vec<Group>) -> Vec<NamedGroup> {
    groups
        .into_iter()
        .enumerate()
        .map(|(i, group)| NamedGroup {
            id: format!("g{i:04}"),
            group,
        })
        .collect()
}
