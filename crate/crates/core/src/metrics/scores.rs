//! Within-group verification scores and the error rates derived from them.
//!
//! Genuine pairs are two members with the same identity, impostor pairs two
//! members with different identities. A comparison is accepted when its
//! score is at or above the decision threshold.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::geometry::unit_cosine;
use crate::group::Group;

/// Genuine and impostor cosine scores of one group. Either side may be empty;
/// metrics that need the missing side return an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
    pub n_images: usize,
    pub n_identities: usize,
}

impl ScoreSet {
    pub fn new(genuine: Vec<f64>, impostor: Vec<f64>) -> Self {
        Self {
            genuine,
            impostor,
            n_images: 0,
            n_identities: 0,
        }
    }

    fn require_impostor(&self) -> Result<()> {
        if self.impostor.is_empty() {
            Err(Error::NoImpostorPairs)
        } else {
            Ok(())
        }
    }

    fn require_genuine(&self) -> Result<()> {
        if self.genuine.is_empty() {
            Err(Error::NoGenuinePairs)
        } else {
            Ok(())
        }
    }
}

/// Scores every unordered member pair, in member order.
pub fn collect_scores(ds: &EmbeddingDataset, group: &Group) -> Result<ScoreSet> {
    group.check_bounds(ds.len())?;
    let m = group.members();
    if m.len() < 2 {
        return Err(Error::TooFewMembers(m.len()));
    }
    let per_row: Vec<(Vec<f64>, Vec<f64>)> = (0..m.len())
        .into_par_iter()
        .map(|i| {
            let (a, ia) = (ds.row(m[i]), ds.identity(m[i]));
            let mut gen = Vec::new();
            let mut imp = Vec::new();
            for &j in &m[i + 1..] {
                let s = unit_cosine(a, ds.row(j));
                if ds.identity(j) == ia {
                    gen.push(s);
                } else {
                    imp.push(s);
                }
            }
            (gen, imp)
        })
        .collect();
    let mut genuine = Vec::new();
    let mut impostor = Vec::new();
    for (g, i) in per_row {
        genuine.extend(g);
        impostor.extend(i);
    }
    let ids: HashSet<usize> = m.iter().map(|&x| ds.identity(x)).collect();
    Ok(ScoreSet {
        genuine,
        impostor,
        n_images: m.len(),
        n_identities: ids.len(),
    })
}

fn count_at_or_above(scores: &[f64], t: f64) -> usize {
    scores.iter().filter(|&&s| s >= t).count()
}

/// Fraction of impostor scores at or above `t`.
pub fn fmr_at(s: &ScoreSet, t: f64) -> Result<f64> {
    s.require_impostor()?;
    Ok(count_at_or_above(&s.impostor, t) as f64 / s.impostor.len() as f64)
}

/// Fraction of genuine scores below `t`.
pub fn fnmr_at(s: &ScoreSet, t: f64) -> Result<f64> {
    s.require_genuine()?;
    let rejected = s.genuine.iter().filter(|&&g| g < t).count();
    Ok(rejected as f64 / s.genuine.len() as f64)
}

/// Arithmetic mean of the impostor scores.
pub fn impostor_mean(s: &ScoreSet) -> Result<f64> {
    s.require_impostor()?;
    Ok(s.impostor.iter().sum::<f64>() / s.impostor.len() as f64)
}

/// Sorted copies of both sides for repeated threshold queries.
struct SortedScores {
    genuine: Vec<f64>,
    impostor: Vec<f64>,
}

impl SortedScores {
    fn new(s: &ScoreSet) -> Self {
        let mut genuine = s.genuine.clone();
        let mut impostor = s.impostor.clone();
        genuine.sort_by(f64::total_cmp);
        impostor.sort_by(f64::total_cmp);
        Self { genuine, impostor }
    }

    fn fmr(&self, t: f64) -> f64 {
        let below = self.impostor.partition_point(|&x| x < t);
        (self.impostor.len() - below) as f64 / self.impostor.len() as f64
    }

    fn fnmr(&self, t: f64) -> f64 {
        self.genuine.partition_point(|&x| x < t) as f64 / self.genuine.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

/// Equal error rate with its operating point.
///
/// Thresholds sweep the sorted union of all scores; the result is
/// `(FMR + FNMR) / 2` where `|FMR - FNMR|` is smallest, the lowest such
/// threshold winning ties.
pub fn eer_point(s: &ScoreSet) -> Result<OperatingPoint> {
    s.require_genuine()?;
    s.require_impostor()?;
    let sorted = SortedScores::new(s);
    let mut grid: Vec<f64> = sorted.genuine.iter().chain(&sorted.impostor).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut best: Option<(f64, OperatingPoint)> = None;
    for t in grid {
        let (fmr, fnmr) = (sorted.fmr(t), sorted.fnmr(t));
        let gap = (fmr - fnmr).abs();
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((
                gap,
                OperatingPoint {
                    threshold: t,
                    fmr,
                    fnmr,
                },
            ));
        }
    }
    Ok(best.expect("non-empty grid").1)
}

pub fn eer(s: &ScoreSet) -> Result<f64> {
    eer_point(s).map(|p| (p.fmr + p.fnmr) / 2.0)
}

/// Smallest threshold with FMR at most `target`, searched over `-1`, the
/// impostor scores, and the next float above the largest impostor score.
pub fn fnmr_at_fmr_point(s: &ScoreSet, target: f64) -> Result<OperatingPoint> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "FMR target must lie in (0, 1], got {target}"
        )));
    }
    s.require_genuine()?;
    s.require_impostor()?;
    let sorted = SortedScores::new(s);
    let top = *sorted.impostor.last().expect("non-empty");
    let mut grid = Vec::with_capacity(sorted.impostor.len() + 2);
    grid.push(-1.0);
    grid.extend(sorted.impostor.iter().copied());
    grid.push(top.next_up());
    grid.dedup();
    // FMR is non-increasing along the ascending grid.
    let pos = grid.partition_point(|&t| sorted.fmr(t) > target);
    let threshold = grid[pos];
    Ok(OperatingPoint {
        threshold,
        fmr: sorted.fmr(threshold),
        fnmr: sorted.fnmr(threshold),
    })
}

pub fn fnmr_at_fmr(s: &ScoreSet, target: f64) -> Result<f64> {
    fnmr_at_fmr_point(s, target).map(|p| p.fnmr)
}

/// FMR at each threshold of an ascending grid.
pub fn fmr_curve(s: &ScoreSet, thresholds: &[f64]) -> Result<Vec<(f64, f64)>> {
    s.require_impostor()?;
    if thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("threshold grid has non-finite values".into()));
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("threshold grid must be sorted ascending".into()));
    }
    let sorted = SortedScores::new(s);
    Ok(thresholds.iter().map(|&t| (t, sorted.fmr(t))).collect())
}

/// Evenly spaced grid from `start` to `end` inclusive.
pub fn threshold_grid(start: f64, end: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![start];
    }
    let step = (end - start) / (steps - 1) as f64;
    (0..steps).map(|i| start + step * i as f64).collect()
}
