//! Image-level bootstrap confidence intervals for FMR at a fixed threshold.
//!
//! Iteration `i` draws from a ChaCha8 generator seeded with `rng_seed` and
//! switched to stream `i`, so every iteration is independent of scheduling
//! and the result is bit-identical for a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::geometry::unit_cosine;
use crate::group::Group;

/// Normal-approximation multiplier for a 95% interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    /// `mean ± 1.96 · std` of the bootstrap FMRs.
    #[default]
    Normal,
    /// 2.5th and 97.5th percentiles of the bootstrap FMRs.
    Percentile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    /// FMR of the group itself, without resampling.
    pub point_estimate: f64,
    pub mean: f64,
    /// Sample standard deviation of the bootstrap FMRs.
    pub std: f64,
    pub halfwidth: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: CiMethod,
    pub iterations_used: usize,
    /// Resamples that drew a single identity and so had no impostor pairs.
    pub degenerate_skipped: usize,
}

/// Bootstraps FMR at threshold `t` by resampling the group's member images
/// with replacement and re-pairing cross-identity members of each resample.
pub fn bootstrap_fmr_ci(
    ds: &EmbeddingDataset,
    group: &Group,
    t: f64,
    iterations: usize,
    rng_seed: u64,
    method: CiMethod,
) -> Result<BootstrapCi> {
    if iterations < 2 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 2 iterations, got {iterations}"
        )));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold {t} is not finite")));
    }
    group.check_bounds(ds.len())?;
    let m = group.members();
    let n = m.len();
    let ids: Vec<usize> = m.iter().map(|&i| ds.identity(i)).collect();

    // accept[a * n + b]: impostor pair (a, b) scores at or above t.
    let accept: Vec<bool> = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let ea = ds.row(m[a]);
            let ids = &ids;
            (0..n).map(move |b| ids[a] != ids[b] && unit_cosine(ea, ds.row(m[b])) >= t)
        })
        .collect();

    let fmr_of = |weights: &[u32]| -> Option<f64> {
        let mut pairs = 0u64;
        let mut accepted = 0u64;
        for a in 0..n {
            let wa = weights[a] as u64;
            if wa == 0 {
                continue;
            }
            for b in a + 1..n {
                let wb = weights[b] as u64;
                if wb == 0 || ids[a] == ids[b] {
                    continue;
                }
                pairs += wa * wb;
                if accept[a * n + b] {
                    accepted += wa * wb;
                }
            }
        }
        (pairs > 0).then(|| accepted as f64 / pairs as f64)
    };

    let point_estimate = fmr_of(&vec![1; n]).ok_or(Error::NoImpostorPairs)?;

    let draws: Vec<Option<f64>> = (0..iterations)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(i as u64);
            let mut weights = vec![0u32; n];
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1;
            }
            fmr_of(&weights)
        })
        .collect();

    let mut values: Vec<f64> = draws.iter().flatten().copied().collect();
    let degenerate_skipped = iterations - values.len();
    if values.len() < 2 {
        return Err(Error::NoImpostorPairs);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    let std = var.sqrt();

    let (lower, upper, halfwidth) = match method {
        CiMethod::Normal => {
            let h = Z_95 * std;
            (mean - h, mean + h, h)
        }
        CiMethod::Percentile => {
            values.sort_by(f64::total_cmp);
            let lo = percentile(&values, 0.025);
            let hi = percentile(&values, 0.975);
            (lo, hi, (hi - lo) / 2.0)
        }
    };
    Ok(BootstrapCi {
        point_estimate,
        mean,
        std,
        halfwidth,
        lower,
        upper,
        method,
        iterations_used: values.len(),
        degenerate_skipped,
    })
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
