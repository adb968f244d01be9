//! Lloyd's k-means with k-means++ seeding on the normalized rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::group::{Group, SeedProvenance};

pub const MAX_ITERATIONS: usize = 100;
pub const CENTROID_SHIFT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    /// Row-major `k x d`.
    pub centroids: Vec<f64>,
    pub dim: usize,
    pub iterations_run: usize,
    pub converged: bool,
    /// Sum of squared distances of the final assignment.
    pub inertia: f64,
    /// Inertia after every assignment step.
    pub inertia_trace: Vec<f64>,
}

impl KMeansResult {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    /// Non-empty clusters as groups, ordered by cluster id, members
    /// ascending.
    pub fn groups(&self) -> Vec<Group> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &c) in self.assignments.iter().enumerate() {
            members[c].push(i);
        }
        members
            .into_iter()
            .filter(|m| !m.is_empty())
            .map(|m| Group::new(m, SeedProvenance::Baseline).expect("partition"))
            .collect()
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(ds: &EmbeddingDataset, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = ds.len();
    let d = ds.dim();
    let mut centroids = Vec::with_capacity(k * d);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    centroids.extend_from_slice(ds.row(first));
    let mut best: Vec<f64> = (0..n).map(|i| sq_dist(ds.row(i), ds.row(first))).collect();

    for _ in 1..k {
        let total: f64 = best.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in best.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just short of `target`.
            pick.unwrap_or_else(|| best.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            (0..n).find(|&i| !chosen[i]).expect("k <= n")
        };
        chosen[next] = true;
        let row = ds.row(next);
        centroids.extend_from_slice(row);
        best.par_iter_mut().enumerate().for_each(|(i, b)| {
            let dd = sq_dist(ds.row(i), row);
            if dd < *b {
                *b = dd;
            }
        });
    }
    centroids
}

fn assign(ds: &EmbeddingDataset, centroids: &[f64], k: usize) -> Vec<(usize, f64)> {
    let d = ds.dim();
    (0..ds.len())
        .into_par_iter()
        .map(|i| {
            let row = ds.row(i);
            let mut best = (0, f64::INFINITY);
            for c in 0..k {
                let dd = sq_dist(row, &centroids[c * d..(c + 1) * d]);
                if dd < best.1 {
                    best = (c, dd);
                }
            }
            best
        })
        .collect()
}

/// Deterministic for a fixed `rng_seed` and independent of thread count.
pub fn kmeans(ds: &EmbeddingDataset, k: usize, rng_seed: u64) -> Result<KMeansResult> {
    let n = ds.len();
    let d = ds.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut centroids = plus_plus_init(ds, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut inertia_trace = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;

    for iter in 0..MAX_ITERATIONS {
        iterations_run = iter + 1;
        let assigned = assign(ds, &centroids, k);
        let changed = assigned
            .iter()
            .zip(&assignments)
            .filter(|((c, _), &old)| *c != old)
            .count();
        inertia_trace.push(assigned.iter().map(|(_, dd)| dd).sum());
        for (slot, (c, _)) in assignments.iter_mut().zip(&assigned) {
            *slot = *c;
        }
        if changed == 0 {
            converged = true;
            break;
        }

        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, x) in sums[c * d..(c + 1) * d].iter_mut().zip(ds.row(i)) {
                *s += x;
            }
        }

        // Empty clusters take the points farthest from their own centroid.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| assigned[b].1.total_cmp(&assigned[a].1).then(a.cmp(&b)));
            for (&c, &p) in empties.iter().zip(&order) {
                sums[c * d..(c + 1) * d].copy_from_slice(ds.row(p));
                counts[c] = 1;
            }
        }

        let mut shift: f64 = 0.0;
        for c in 0..k {
            let inv = 1.0 / counts[c] as f64;
            let new: Vec<f64> = sums[c * d..(c + 1) * d].iter().map(|s| s * inv).collect();
            shift = shift.max(sq_dist(&new, &centroids[c * d..(c + 1) * d]).sqrt());
            centroids[c * d..(c + 1) * d].copy_from_slice(&new);
        }
        if shift < CENTROID_SHIFT_TOLERANCE {
            converged = true;
            let assigned = assign(ds, &centroids, k);
            inertia_trace.push(assigned.iter().map(|(_, dd)| dd).sum());
            for (slot, (c, _)) in assignments.iter_mut().zip(&assigned) {
                *slot = *c;
            }
            break;
        }
    }

    if !converged {
        // Bring the assignment in line with the final centroids.
        let assigned = assign(ds, &centroids, k);
        inertia_trace.push(assigned.iter().map(|(_, dd)| dd).sum());
        for (slot, (c, _)) in assignments.iter_mut().zip(&assigned) {
            *slot = *c;
        }
    }

    Ok(KMeansResult {
        k,
        inertia: *inertia_trace.last().expect("at least one iteration"),
        assignments,
        centroids,
        dim: d,
        iterations_run,
        converged,
        inertia_trace,
    })
}
