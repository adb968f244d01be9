//! Latent feature alignment: grow a group along the identity-weighted
//! direction of its current members.
//!
//! Each iteration recomputes the direction from the members, projects every
//! remaining pool candidate onto it, and admits the best-aligned candidate
//! unless its normalized projection falls below `tau`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, MIN_NORM};
use crate::group::{Group, LatentDirection};

/// Pools larger than this are scanned in parallel.
const PARALLEL_POOL: usize = 8192;

/// One admitted candidate.
///
/// `identity_count` and `group_size` describe the group whose direction
/// selected the candidate, i.e. before the candidate was inserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthStep {
    pub index: usize,
    pub projection: f64,
    pub identity_count: usize,
    pub group_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    BelowThreshold,
    PoolExhausted,
    SizeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    pub steps: Vec<GrowthStep>,
    /// Best projection at the final iteration when it fell below `tau`.
    pub stop_projection: Option<f64>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Growth {
    pub group: Group,
    pub trace: GrowthTrace,
}

/// Best candidate found by a projection scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub index: usize,
    pub projection: f64,
}

impl Candidate {
    /// Total order used for the argmax: larger projection wins, then lower
    /// index.
    #[inline]
    fn beats(&self, other: &Candidate) -> bool {
        self.projection > other.projection || (self.projection == other.projection && self.index < other.index)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GrowOptions {
    /// Stop once the group reaches this many members.
    pub max_members: Option<usize>,
}

/// Identity-weighted sum `sum_j e_j / c_{l_j}`.
///
/// The `1/C` normalization of the mean is left out: every consumer divides
/// by the direction's norm, so it has no effect.
pub fn get_latent_direction(ds: &EmbeddingDataset, members: &[usize]) -> Result<LatentDirection> {
    if members.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &m in members {
        ds.check_index(m)?;
        *counts.entry(ds.identity(m)).or_default() += 1;
    }
    let mut v = vec![0.0; ds.dim()];
    for &m in members {
        let w = 1.0 / counts[&ds.identity(m)] as f64;
        for (acc, x) in v.iter_mut().zip(ds.row(m)) {
            *acc += w * x;
        }
    }
    let n = norm(&v);
    if !(n > MIN_NORM) {
        return Err(Error::DegenerateDirection { norm: n });
    }
    LatentDirection::new(v, members.len(), counts.len())
}

/// Argmax of `<e_k, v> / ||v||` over `pool`, ties broken by lowest index.
/// Returns `None` for an empty pool.
pub fn best_candidate(ds: &EmbeddingDataset, direction: &[f64], pool: &[usize]) -> Option<Candidate> {
    let vn = norm(direction);
    let score = |&k: &usize| Candidate {
        index: k,
        projection: dot(ds.row(k), direction) / vn,
    };
    let pick = |a: Candidate, b: Candidate| if b.beats(&a) { b } else { a };
    if pool.len() >= PARALLEL_POOL {
        pool.par_iter().map(score).reduce_with(pick)
    } else {
        pool.iter().map(score).reduce(pick)
    }
}

/// The selection made by a single growth iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    pub candidate: Candidate,
    pub stop: bool,
}

/// Runs the project/argmax/stop test of one iteration for a given direction.
pub fn step_decision(
    ds: &EmbeddingDataset,
    direction: &LatentDirection,
    pool: &[usize],
    tau: f64,
) -> Option<StepDecision> {
    best_candidate(ds, direction.components(), pool).map(|candidate| StepDecision {
        candidate,
        stop: candidate.projection < tau,
    })
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(tau))
    }
}

/// Grows `seed` until the best projection drops below `tau` or the pool is
/// empty. `pool` defaults to every row outside the seed and is copied, so
/// runs from different seeds may overlap.
pub fn lfa_grow(ds: &EmbeddingDataset, seed: &Group, tau: f64, pool: Option<&[usize]>) -> Result<Growth> {
    lfa_grow_with(ds, seed, tau, pool, GrowOptions::default())
}

pub fn lfa_grow_with(
    ds: &EmbeddingDataset,
    seed: &Group,
    tau: f64,
    pool: Option<&[usize]>,
    options: GrowOptions,
) -> Result<Growth> {
    check_tau(tau)?;
    if seed.is_empty() {
        return Err(Error::EmptyGroup);
    }
    seed.check_bounds(ds.len())?;

    let mut in_group = vec![false; ds.len()];
    for &m in seed.members() {
        in_group[m] = true;
    }
    let mut pool: Vec<usize> = match pool {
        None => (0..ds.len()).filter(|&i| !in_group[i]).collect(),
        Some(p) => {
            let mut seen = in_group.clone();
            let mut out = Vec::with_capacity(p.len());
            for &i in p {
                ds.check_index(i)?;
                if !seen[i] {
                    seen[i] = true;
                    out.push(i);
                }
            }
            out
        }
    };

    let mut group = seed.clone();
    let mut steps = Vec::new();
    let (direction, stop_projection, stop_reason) = loop {
        let direction = get_latent_direction(ds, group.members())?;
        if options.max_members.is_some_and(|m| group.len() >= m) {
            break (direction, None, StopReason::SizeLimit);
        }
        let Some(best) = best_candidate(ds, direction.components(), &pool) else {
            break (direction, None, StopReason::PoolExhausted);
        };
        if best.projection < tau {
            break (direction, Some(best.projection), StopReason::BelowThreshold);
        }
        steps.push(GrowthStep {
            index: best.index,
            projection: best.projection,
            identity_count: direction.source_identity_count(),
            group_size: direction.source_group_size(),
        });
        let pos = pool.iter().position(|&k| k == best.index).expect("candidate from pool");
        pool.swap_remove(pos);
        group.push(best.index);
    };

    group.direction = Some(direction);
    group.threshold_used = Some(tau);
    Ok(Growth {
        group,
        trace: GrowthTrace {
            steps,
            stop_projection,
            stop_reason,
        },
    })
}

/// Grows every seed independently with a fresh pool. Output order matches
/// seed order; a failing seed does not affect the others.
pub fn run_all(ds: &EmbeddingDataset, tau: f64, seeds: &[Group]) -> Vec<Result<Growth>> {
    run_all_with(ds, tau, seeds, GrowOptions::default())
}

pub fn run_all_with(ds: &EmbeddingDataset, tau: f64, seeds: &[Group], options: GrowOptions) -> Vec<Result<Growth>> {
    seeds
        .par_iter()
        .map(|s| lfa_grow_with(ds, s, tau, None, options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::SeedProvenance;

    fn seed(m: &[usize]) -> Group {
        Group::new(m.to_vec(), SeedProvenance::UserSupplied).unwrap()
    }

    #[test]
    fn direction_equal_weights() {
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1]).unwrap();
        let v = get_latent_direction(&ds, &[0, 1]).unwrap();
        assert_eq!(v.components(), &[1.0, 1.0]);
        assert_eq!(v.source_group_size(), 2);
        assert_eq!(v.source_identity_count(), 2);
    }

    #[test]
    fn direction_balances_identities() {
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 0, 1]).unwrap();
        let v = get_latent_direction(&ds, &[0, 1, 2]).unwrap();
        assert_eq!(v.components(), &[1.0, 1.0]);
        assert_eq!(v.source_identity_count(), 2);
    }

    #[test]
    fn direction_errors() {
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]], &[0, 1]).unwrap();
        assert_eq!(get_latent_direction(&ds, &[]), Err(Error::EmptyGroup));
        assert!(matches!(
            get_latent_direction(&ds, &[0, 1]),
            Err(Error::DegenerateDirection { .. })
        ));
        assert!(get_latent_direction(&ds, &[5]).is_err());
    }

    #[test]
    fn orthogonal_candidate_is_not_admitted() {
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1]).unwrap();
        let g = lfa_grow(&ds, &seed(&[0]), 0.5, None).unwrap();
        assert_eq!(g.group.members(), &[0]);
        assert!(g.trace.steps.is_empty());
        assert_eq!(g.trace.stop_projection, Some(0.0));
        assert_eq!(g.trace.stop_reason, StopReason::BelowThreshold);
    }

    #[test]
    fn duplicate_admitted_then_stop() {
        // After admitting the duplicate the direction is still (1, 0) up to
        // scale, so the orthogonal row projects to 0 < 0.9.
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1, 2]).unwrap();
        let g = lfa_grow(&ds, &seed(&[0]), 0.9, Some(&[1, 2])).unwrap();
        assert_eq!(g.group.members(), &[0, 1]);
        assert_eq!(g.trace.steps.len(), 1);
        assert_eq!(g.trace.steps[0].index, 1);
        assert!((g.trace.steps[0].projection - 1.0).abs() < 1e-12);
        assert_eq!(g.trace.stop_projection, Some(0.0));
        assert_eq!(g.group.threshold_used, Some(0.9));
        assert_eq!(g.group.direction.as_ref().unwrap().source_group_size(), 2);
    }

    #[test]
    fn ties_break_by_lowest_index() {
        let ds = EmbeddingDataset::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8], vec![0.6, 0.8]],
            &[0, 1, 2, 3],
        )
        .unwrap();
        let c = best_candidate(&ds, &[1.0, 0.0], &[3, 1, 2]).unwrap();
        assert_eq!(c.index, 2);
    }

    #[test]
    fn pool_exhaustion_and_size_limit() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, 0.01 * i as f64]).collect();
        let ds = EmbeddingDataset::from_rows(&rows, &[0, 1, 2, 3, 4]).unwrap();
        let g = lfa_grow(&ds, &seed(&[0]), 0.5, None).unwrap();
        assert_eq!(g.group.len(), 5);
        assert_eq!(g.trace.stop_reason, StopReason::PoolExhausted);
        assert_eq!(g.trace.stop_projection, None);
        let g = lfa_grow_with(&ds, &seed(&[0]), 0.5, None, GrowOptions { max_members: Some(3) }).unwrap();
        assert_eq!(g.group.members(), &[0, 1, 2]);
        assert_eq!(g.trace.stop_reason, StopReason::SizeLimit);
    }

    #[test]
    fn invalid_inputs() {
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1]).unwrap();
        for tau in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(
                lfa_grow(&ds, &seed(&[0]), tau, None),
                Err(Error::InvalidThreshold(_))
            ));
        }
        assert_eq!(lfa_grow(&ds, &seed(&[]), 0.5, None), Err(Error::EmptyGroup));
        assert!(lfa_grow(&ds, &seed(&[0]), 0.5, Some(&[7])).is_err());
    }

    #[test]
    fn run_all_keeps_order_and_isolates_failures() {
        let ds = EmbeddingDataset::from_rows(
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.9, 0.1], vec![0.0, 1.0]],
            &[0, 1, 2, 3],
        )
        .unwrap();
        assert!(run_all(&ds, 0.5, &[]).is_empty());
        let out = run_all(&ds, 0.5, &[seed(&[3]), seed(&[0, 1]), seed(&[0])]);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].as_ref().unwrap().group.members()[0], 3);
        assert!(matches!(out[1], Err(Error::DegenerateDirection { .. })));
        assert_eq!(out[2].as_ref().unwrap().group.members(), &[0, 2]);
    }
}
