//! Majority-vote merging of several annotators' categorical labels.
//!
//! A label wins a cell when it holds strictly more than half of the valid
//! (non-unknown) votes. Its agreement is its vote count over the total
//! number of annotators, so abstentions lower agreement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{AttributeRow, AttributeSchema, AttributeTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consensus<T> {
    /// `None` when no label holds a strict majority.
    pub label: Option<T>,
    pub agreement: Option<f64>,
}

/// Merges one cell's votes; `None` votes are unknown.
pub fn merge_votes<T: PartialEq + Copy>(votes: &[Option<T>], annotator_count: usize) -> Result<Consensus<T>> {
    if votes.len() != annotator_count {
        return Err(Error::InvalidArgument(format!(
            "{} votes for {annotator_count} annotators",
            votes.len()
        )));
    }
    let valid: Vec<T> = votes.iter().flatten().copied().collect();
    let n = valid.len();
    for (i, &label) in valid.iter().enumerate() {
        if valid[..i].contains(&label) {
            continue;
        }
        let count = valid.iter().filter(|&&v| v == label).count();
        if 2 * count > n {
            return Ok(Consensus {
                label: Some(label),
                agreement: Some(count as f64 / annotator_count as f64),
            });
        }
    }
    Ok(Consensus {
        label: None,
        agreement: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: String,
    pub count: usize,
    /// Share of all images, in percent.
    pub percentage: f64,
    pub mean_agreement: f64,
    /// Population standard deviation of agreement.
    pub std_agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeStats {
    pub attribute: String,
    pub classes: Vec<ClassStats>,
    /// Images without a consensus label.
    pub unknown_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusTable {
    pub schema: AttributeSchema,
    pub image_ids: Vec<String>,
    pub labels: Vec<AttributeRow>,
    pub agreement: Vec<Vec<Option<f64>>>,
    pub annotator_count: usize,
    pub stats: Vec<AttributeStats>,
}

impl ConsensusTable {
    /// Consensus labels as an attribute table, for coherence scoring.
    pub fn to_attribute_table(&self) -> AttributeTable {
        let mut t = AttributeTable::new(self.schema.clone());
        for (id, row) in self.image_ids.iter().zip(&self.labels) {
            t.insert_row(id, row.clone()).expect("rows follow the schema");
        }
        t
    }
}

/// Merges per-annotator tables cell by cell.
///
/// All tables must share one schema. When their image sets differ the call
/// fails unless `intersect` is set, in which case only common images are
/// kept. Image order follows the first table.
pub fn consensus_table(tables: &[AttributeTable], intersect: bool) -> Result<ConsensusTable> {
    if tables.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "consensus needs at least 2 annotators, got {}",
            tables.len()
        )));
    }
    let schema = tables[0].schema().clone();
    if let Some(i) = tables.iter().position(|t| *t.schema() != schema) {
        return Err(Error::SchemaMismatch(format!(
            "annotator {i} uses a different attribute schema"
        )));
    }

    let mut image_ids: Vec<String> = tables[0].image_ids().to_vec();
    let differs = tables[1..]
        .iter()
        .any(|t| t.len() != image_ids.len() || image_ids.iter().any(|id| t.row(id).is_none()));
    if differs {
        if !intersect {
            return Err(Error::ImageSetMismatch(
                "annotators labelled different image sets".into(),
            ));
        }
        image_ids.retain(|id| tables.iter().all(|t| t.row(id).is_some()));
        log::warn!("annotator image sets differ; keeping {} common images", image_ids.len());
    }

    let k = tables.len();
    let cells: Vec<(AttributeRow, Vec<Option<f64>>)> = image_ids
        .par_iter()
        .map(|id| {
            let rows: Vec<&[Option<u16>]> = tables.iter().map(|t| t.row(id).expect("present")).collect();
            (0..schema.len())
                .map(|a| {
                    let votes: Vec<Option<u16>> = rows.iter().map(|r| r[a]).collect();
                    let c = merge_votes(&votes, k).expect("one vote per annotator");
                    (c.label, c.agreement)
                })
                .unzip()
        })
        .collect();
    let (labels, agreement): (Vec<_>, Vec<_>) = cells.into_iter().unzip();

    let n_images = image_ids.len();
    let stats = schema
        .attributes
        .iter()
        .enumerate()
        .map(|(a, spec)| {
            let classes = (0..spec.classes.len())
                .map(|c| {
                    let agr: Vec<f64> = labels
                        .iter()
                        .zip(&agreement)
                        .filter(|(l, _)| l[a] == Some(c as u16))
                        .map(|(_, g)| g[a].expect("agreement accompanies a label"))
                        .collect();
                    let (mean, std) = mean_std(&agr);
                    ClassStats {
                        class: spec.classes[c].clone(),
                        count: agr.len(),
                        percentage: if n_images == 0 {
                            0.0
                        } else {
                            100.0 * agr.len() as f64 / n_images as f64
                        },
                        mean_agreement: mean,
                        std_agreement: std,
                    }
                })
                .collect();
            AttributeStats {
                attribute: spec.name.clone(),
                classes,
                unknown_count: labels.iter().filter(|l| l[a].is_none()).count(),
            }
        })
        .collect();

    Ok(ConsensusTable {
        schema,
        image_ids,
        labels,
        agreement,
        annotator_count: k,
        stats,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::AttributeSpec;

    #[test]
    fn worked_example() {
        let (m, s, no) = (Some("mustache"), Some("stubble"), Some("no"));
        let c = merge_votes(&[m, m, m, s, no], 5).unwrap();
        assert_eq!(c.label, Some("mustache"));
        assert_eq!(c.agreement, Some(0.6));
    }

    #[test]
    fn unknowns_shrink_the_valid_pool() {
        let c = merge_votes(&[Some('a'), Some('a'), None, None, None], 5).unwrap();
        assert_eq!(c.label, Some('a'));
        assert_eq!(c.agreement, Some(0.4));
        let tie = merge_votes(&[Some('a'), Some('b'), None, None, None], 5).unwrap();
        assert_eq!(tie.label, None);
        assert_eq!(tie.agreement, None);
        let none = merge_votes::<char>(&[None, None], 2).unwrap();
        assert_eq!(none.label, None);
        assert!(merge_votes(&[Some(1)], 2).is_err());
    }

    fn schema() -> AttributeSchema {
        AttributeSchema::new(vec![
            AttributeSpec::new("beard", &["no", "mustache", "stubble", "full"]),
            AttributeSpec::new("glasses", &["no", "regular", "sun"]),
        ])
        .unwrap()
    }

    fn annotator(rows: &[(&str, [&str; 2])]) -> AttributeTable {
        let mut t = AttributeTable::new(schema());
        for (id, toks) in rows {
            t.insert_tokens(id, toks).unwrap();
        }
        t
    }

    #[test]
    fn table_stats() {
        // beard on x: mustache x3 of 5; on y: no x5. glasses on x: no consensus.
        let tables = vec![
            annotator(&[("x", ["mustache", "regular"]), ("y", ["no", "no"])]),
            annotator(&[("x", ["mustache", "sun"]), ("y", ["no", "no"])]),
            annotator(&[("x", ["mustache", "unknown"]), ("y", ["no", "no"])]),
            annotator(&[("x", ["stubble", "unknown"]), ("y", ["no", "unknown"])]),
            annotator(&[("x", ["no", "unknown"]), ("y", ["no", "unknown"])]),
        ];
        let c = consensus_table(&tables, false).unwrap();
        assert_eq!(c.labels[0], vec![Some(1), None]);
        assert_eq!(c.agreement[0], vec![Some(0.6), None]);
        assert_eq!(c.agreement[1], vec![Some(1.0), Some(0.6)]);
        let beard = &c.stats[0];
        assert_eq!(beard.classes[0].count, 1);
        assert_eq!(beard.classes[0].percentage, 50.0);
        assert_eq!(beard.classes[1].mean_agreement, 0.6);
        let glasses = &c.stats[1];
        assert_eq!(glasses.unknown_count, 1);
        assert_eq!(glasses.classes[0].count, 1);
        assert_eq!(c.to_attribute_table().token("x", 0), Some("mustache"));
    }

    #[test]
    fn image_set_mismatch() {
        let a = annotator(&[("x", ["no", "no"]), ("y", ["no", "no"])]);
        let b = annotator(&[("x", ["no", "no"])]);
        assert!(matches!(
            consensus_table(&[a.clone(), b.clone()], false),
            Err(Error::ImageSetMismatch(_))
        ));
        let c = consensus_table(&[a.clone(), b], true).unwrap();
        assert_eq!(c.image_ids, vec!["x"]);
        assert!(consensus_table(&[a], false).is_err());
    }
}
