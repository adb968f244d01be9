//! Attribute tables on disk: `image_id,<attribute>...` CSV, per-annotator
//! JSON, and the consensus CSV that adds one agreement column per attribute.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use lfa_core::annotation::ConsensusTable;
use lfa_core::metrics::{AttributeSchema, AttributeTable, UNKNOWN};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Suffix of the agreement columns in a consensus CSV. Such columns are
/// skipped when the file is read back as an attribute table.
pub const AGREEMENT_SUFFIX: &str = "_agreement";

fn invalid(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::validation("cli::InvalidAttributeFile", format!("{}: {msg}", path.display()))
}

/// Reads an attribute CSV, inferring each attribute's classes from the
/// tokens present. Consensus files are accepted as well.
pub fn read_attribute_csv(path: &Path) -> CliResult<AttributeTable> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    let headers = rdr.headers().map_err(|e| CliError::read(path, e))?.clone();
    if headers.get(0) != Some("image_id") {
        return Err(invalid(path, "first column must be `image_id`"));
    }
    let keep: Vec<usize> = (1..headers.len())
        .filter(|&c| !headers[c].ends_with(AGREEMENT_SUFFIX))
        .collect();
    let names: Vec<String> = keep.iter().map(|&c| headers[c].to_string()).collect();
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| invalid(path, format!("row {}: {e}", line + 1)))?;
        ids.push(rec[0].to_string());
        rows.push(keep.iter().map(|&c| rec[c].to_string()).collect());
    }
    let schema = AttributeSchema::infer(&names, &rows).map_err(|e| invalid(path, e))?;
    let mut table = AttributeTable::new(schema);
    for (id, row) in ids.iter().zip(&rows) {
        table.insert_tokens(id, row).map_err(|e| invalid(path, e))?;
    }
    Ok(table)
}

pub fn write_attribute_csv(path: &Path, table: &AttributeTable) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    let fail = |e: csv::Error| CliError::write(path, e);
    let mut header = vec!["image_id".to_string()];
    header.extend(table.schema().names().map(str::to_string));
    w.write_record(&header).map_err(fail)?;
    for id in table.image_ids() {
        let mut rec = vec![id.clone()];
        rec.extend((0..table.schema().len()).map(|a| table.token(id, a).unwrap_or(UNKNOWN).to_string()));
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

/// Reads one annotator's JSON object `{image_id: {attribute: token}}`.
///
/// Missing attributes and `null` values count as unknown; attributes
/// outside the schema are rejected. Images are kept in key order.
pub fn read_annotator_json(path: &Path, schema: &AttributeSchema) -> CliResult<AttributeTable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let raw: BTreeMap<String, BTreeMap<String, Value>> = serde_json::from_str(&text).map_err(|e| invalid(path, e))?;
    let mut table = AttributeTable::new(schema.clone());
    for (image, attrs) in raw {
        if let Some(k) = attrs.keys().find(|k| schema.position(k).is_none()) {
            return Err(CliError::validation(
                "metrics::SchemaMismatch",
                format!("{}: image {image:?} has unknown attribute {k:?}", path.display()),
            ));
        }
        let mut row = Vec::with_capacity(schema.len());
        for (a, name) in schema.names().enumerate() {
            let value = match attrs.get(name) {
                None | Some(Value::Null) => None,
                Some(Value::String(tok)) => schema
                    .parse_token(a, tok)
                    .map_err(|e| CliError::validation(e.code(), format!("{}: image {image:?}: {e}", path.display())))?,
                Some(other) => {
                    return Err(invalid(
                        path,
                        format!("image {image:?}: {name} is {other}, not a string"),
                    ))
                }
            };
            row.push(value);
        }
        table.insert_row(&image, row).map_err(|e| invalid(path, e))?;
    }
    Ok(table)
}

pub fn read_schema_json(path: &Path) -> CliResult<AttributeSchema> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let schema: AttributeSchema = serde_json::from_str(&text).map_err(|e| invalid(path, e))?;
    AttributeSchema::new(schema.attributes).map_err(Into::into)
}

/// Agreement with six decimals; empty when there is no consensus.
fn agreement_cell(a: Option<f64>) -> String {
    a.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn write_consensus_csv(path: &Path, c: &ConsensusTable) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    let fail = |e: csv::Error| CliError::write(path, e);
    let names: Vec<&str> = c.schema.names().collect();
    let mut header = vec!["image_id".to_string()];
    header.extend(names.iter().map(|n| n.to_string()));
    header.extend(names.iter().map(|n| format!("{n}{AGREEMENT_SUFFIX}")));
    w.write_record(&header).map_err(fail)?;
    for (i, id) in c.image_ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend((0..names.len()).map(|a| c.schema.token(a, c.labels[i][a]).to_string()));
        rec.extend(c.agreement[i].iter().map(|&a| agreement_cell(a)));
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}
