//! Comparison group-formers with sizes matched to LFA: k-means clusters and
//! nearest-neighbor-search neighborhoods.

mod kmeans;

pub use kmeans::{kmeans, KMeansResult, CENTROID_SHIFT_TOLERANCE, MAX_ITERATIONS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::geometry::unit_cosine;
use crate::group::{Group, SeedProvenance};
use crate::lfa::{run_all_with, GrowOptions};

/// For every seed row, the seed followed by its `n - 1` most similar rows
/// (cosine, descending; ties by lowest index). Groups may overlap.
pub fn nns_groups(ds: &EmbeddingDataset, seed_indices: &[usize], n: usize) -> Result<Vec<Group>> {
    if n == 0 || n > ds.len() {
        return Err(Error::InvalidN { n, len: ds.len() });
    }
    for &s in seed_indices {
        ds.check_index(s)?;
    }
    Ok(seed_indices
        .par_iter()
        .map(|&s| {
            let e = ds.row(s);
            let mut scored: Vec<(f64, usize)> = (0..ds.len())
                .filter(|&j| j != s)
                .map(|j| (unit_cosine(e, ds.row(j)), j))
                .collect();
            let order = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
            let take = n - 1;
            if take > 0 && take < scored.len() {
                scored.select_nth_unstable_by(take - 1, order);
            }
            scored.truncate(take);
            scored.sort_by(order);
            let mut members = Vec::with_capacity(n);
            members.push(s);
            members.extend(scored.into_iter().map(|(_, j)| j));
            Group::new(members, SeedProvenance::Baseline).expect("distinct rows")
        })
        .collect())
}

/// `k = round(N / target_n)`, clamped to `[1, N]`.
pub fn kmeans_k_for_size(n_rows: usize, target_n: usize) -> Result<usize> {
    if target_n == 0 || target_n > n_rows {
        return Err(Error::InvalidN {
            n: target_n,
            len: n_rows,
        });
    }
    let k = (n_rows as f64 / target_n as f64).round() as usize;
    Ok(k.clamp(1, n_rows))
}

pub const TAU_PROBE_BUDGET: usize = 20;
pub const SIZE_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauProbe {
    pub tau: f64,
    pub mean_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauMatch {
    pub tau: f64,
    pub mean_size: f64,
    pub probes: Vec<TauProbe>,
}

fn mean_grown_size(ds: &EmbeddingDataset, seeds: &[Group], tau: f64, cap: Option<usize>) -> Result<(f64, bool)> {
    let runs = run_all_with(ds, tau, seeds, GrowOptions { max_members: cap });
    let sizes: Vec<usize> = runs
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|g| g.group.len())
        .collect();
    if sizes.is_empty() {
        return Err(match runs.into_iter().find_map(Result::err) {
            Some(e) => e,
            None => Error::InvalidArgument("no seeds supplied".into()),
        });
    }
    let capped = cap.is_some_and(|c| sizes.iter().any(|&s| s >= c));
    Ok((sizes.iter().sum::<usize>() as f64 / sizes.len() as f64, capped))
}

/// Bisects `tau` over `(0, 1)` until the mean grown size over `seeds` lies
/// within 10% of `target_n`, using at most [`TAU_PROBE_BUDGET`] probes.
///
/// Probes run with a growth cap of `10 * target_n`; a probe whose capped
/// mean is not already conclusive is re-run without the cap.
pub fn match_lfa_tau(ds: &EmbeddingDataset, seeds: &[Group], target_n: usize) -> Result<TauMatch> {
    if target_n == 0 || target_n > ds.len() {
        return Err(Error::InvalidN {
            n: target_n,
            len: ds.len(),
        });
    }
    let target = target_n as f64;
    let cap = Some(target_n.saturating_mul(10).max(2));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut probes: Vec<TauProbe> = Vec::new();
    for _ in 0..TAU_PROBE_BUDGET {
        let tau = 0.5 * (lo + hi);
        let (mut mean, capped) = mean_grown_size(ds, seeds, tau, cap)?;
        if capped && mean <= target * (1.0 + SIZE_TOLERANCE) {
            mean = mean_grown_size(ds, seeds, tau, None)?.0;
        }
        probes.push(TauProbe { tau, mean_size: mean });
        if (mean - target).abs() <= SIZE_TOLERANCE * target {
            return Ok(TauMatch {
                tau,
                mean_size: mean,
                probes,
            });
        }
        // Higher tau stops growth earlier.
        if mean > target {
            lo = tau;
        } else {
            hi = tau;
        }
    }
    let best = probes
        .iter()
        .min_by(|a, b| (a.mean_size - target).abs().total_cmp(&(b.mean_size - target).abs()))
        .expect("at least one probe");
    Err(Error::Unachievable {
        target: target_n,
        best_tau: best.tau,
        best_mean: best.mean_size,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeMatchMode {
    Kmeans,
    Lfa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchedParameter {
    K(usize),
    Tau(TauMatch),
}

/// Finds the k-means `k` or LFA `tau` giving mean group size near
/// `target_n`. LFA mode needs the seeds the groups will be grown from.
pub fn match_group_size(
    ds: &EmbeddingDataset,
    target_n: usize,
    mode: SizeMatchMode,
    seeds: &[Group],
) -> Result<MatchedParameter> {
    match mode {
        SizeMatchMode::Kmeans => kmeans_k_for_size(ds.len(), target_n).map(MatchedParameter::K),
        SizeMatchMode::Lfa => match_lfa_tau(ds, seeds, target_n).map(MatchedParameter::Tau),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nns_single_member_groups() {
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1]).unwrap();
        let g = nns_groups(&ds, &[1, 0], 1).unwrap();
        assert_eq!(g[0].members(), &[1]);
        assert_eq!(g[1].members(), &[0]);
    }

    #[test]
    fn nns_picks_nearest() {
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![0.99, 0.141], vec![0.0, 1.0]], &[0, 1, 2]).unwrap();
        let g = nns_groups(&ds, &[0], 2).unwrap();
        assert_eq!(g[0].members(), &[0, 1]);
        let g = nns_groups(&ds, &[2], 3).unwrap();
        assert_eq!(g[0].members(), &[2, 1, 0]);
    }

    #[test]
    fn nns_ties_lowest_index_and_errors() {
        let ds = EmbeddingDataset::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]],
            &[0, 1, 2, 3],
        )
        .unwrap();
        let g = nns_groups(&ds, &[0], 3).unwrap();
        assert_eq!(g[0].members(), &[0, 1, 2]);
        assert_eq!(nns_groups(&ds, &[0], 5), Err(Error::InvalidN { n: 5, len: 4 }));
        assert!(nns_groups(&ds, &[0], 0).is_err());
        assert!(nns_groups(&ds, &[9], 2).is_err());
    }

    #[test]
    fn kmeans_size_matching() {
        assert_eq!(kmeans_k_for_size(200_000, 100).unwrap(), 2000);
        assert_eq!(kmeans_k_for_size(5000, 5000).unwrap(), 1);
        assert_eq!(kmeans_k_for_size(10, 3).unwrap(), 3);
        assert!(kmeans_k_for_size(10, 11).is_err());
        assert!(kmeans_k_for_size(10, 0).is_err());
    }
}
