//! Semantic coherence: mean attribute distance over intra-group pairs.
//! Lower is more homogeneous.

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::metrics::attributes::{known_mismatches, AttributeTable};

/// Total distance and pair count over all unordered pairs of members that
/// have attribute rows.
pub fn pair_distance_totals(ds: &EmbeddingDataset, group: &Group, attrs: &AttributeTable) -> (u64, u64, usize) {
    let rows: Vec<&[Option<u16>]> = group
        .members()
        .iter()
        .filter_map(|&m| attrs.row(ds.image_id(m)))
        .collect();
    let mut total = 0u64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            total += known_mismatches(a, b) as u64;
        }
    }
    let n = rows.len() as u64;
    (total, n * n.saturating_sub(1) / 2, rows.len())
}

/// Mean attribute distance over member pairs.
pub fn group_coherence(ds: &EmbeddingDataset, group: &Group, attrs: &AttributeTable) -> Result<f64> {
    let (total, pairs, rated) = pair_distance_totals(ds, group, attrs);
    if rated < 2 {
        return Err(Error::TooFewMembers(rated));
    }
    Ok(total as f64 / pairs as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodCoherence {
    pub coherence: f64,
    pub total_distance: u64,
    pub total_pairs: u64,
    pub eligible_groups: usize,
    pub skipped_groups: usize,
}

/// Pair-pooled coherence over many groups: total pairwise distance divided
/// by total pair count. Groups with fewer than two rated members are
/// skipped.
pub fn method_coherence(ds: &EmbeddingDataset, groups: &[Group], attrs: &AttributeTable) -> Result<MethodCoherence> {
    let mut total_distance = 0;
    let mut total_pairs = 0;
    let mut eligible = 0;
    for g in groups {
        let (d, p, rated) = pair_distance_totals(ds, g, attrs);
        if rated >= 2 {
            total_distance += d;
            total_pairs += p;
            eligible += 1;
        }
    }
    if eligible == 0 {
        return Err(Error::NoEligibleGroups);
    }
    Ok(MethodCoherence {
        coherence: total_distance as f64 / total_pairs as f64,
        total_distance,
        total_pairs,
        eligible_groups: eligible,
        skipped_groups: groups.len() - eligible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::SeedProvenance;
    use crate::metrics::attributes::AttributeSchema;

    fn fixture() -> (EmbeddingDataset, AttributeTable) {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0, i as f64]).collect();
        let ds = EmbeddingDataset::from_rows(&rows, &[0, 1, 2, 3, 4, 5]).unwrap();
        let names: Vec<String> = (0..3).map(|i| format!("a{i}")).collect();
        let mut t = AttributeTable::new(AttributeSchema::binary(&names));
        // img0..img2: pairwise distances 1 (0-1), 3 (1-2), 2 (0-2)
        t.insert_tokens("img0", &["yes", "yes", "yes"]).unwrap();
        t.insert_tokens("img1", &["no", "yes", "yes"]).unwrap();
        t.insert_tokens("img2", &["yes", "no", "no"]).unwrap();
        t.insert_tokens("img3", &["yes", "yes", "yes"]).unwrap();
        t.insert_tokens("img4", &["yes", "yes", "yes"]).unwrap();
        (ds, t)
    }

    fn g(m: &[usize]) -> Group {
        Group::new(m.to_vec(), SeedProvenance::UserSupplied).unwrap()
    }

    #[test]
    fn identical_rows_score_zero() {
        let (ds, t) = fixture();
        assert_eq!(group_coherence(&ds, &g(&[0, 3, 4]), &t).unwrap(), 0.0);
    }

    #[test]
    fn mean_of_pair_distances() {
        let (ds, t) = fixture();
        assert_eq!(group_coherence(&ds, &g(&[0, 1, 2]), &t).unwrap(), 2.0);
    }

    #[test]
    fn members_without_rows_are_ignored() {
        let (ds, t) = fixture();
        assert_eq!(group_coherence(&ds, &g(&[0, 1, 5]), &t).unwrap(), 1.0);
        assert_eq!(group_coherence(&ds, &g(&[0, 5]), &t), Err(Error::TooFewMembers(1)));
    }

    #[test]
    fn pooled_over_groups() {
        let (ds, t) = fixture();
        let one = method_coherence(&ds, &[g(&[0, 1, 2])], &t).unwrap();
        assert_eq!(one.coherence, 2.0);
        // Equal pair counts: {0,1} -> 1, {1,2} -> 3, pooled 2.
        let two = method_coherence(&ds, &[g(&[0, 1]), g(&[1, 2]), g(&[5])], &t).unwrap();
        assert_eq!(two.coherence, 2.0);
        assert_eq!(two.skipped_groups, 1);
        // Unequal pair counts: (0 + 0 + 0) over 3 pairs and 3 over 1 pair.
        let uneq = method_coherence(&ds, &[g(&[0, 3, 4]), g(&[1, 2])], &t).unwrap();
        assert_eq!(uneq.coherence, 3.0 / 4.0);
        assert_eq!(
            method_coherence(&ds, &[g(&[5])], &t).unwrap_err(),
            Error::NoEligibleGroups
        );
    }
}
