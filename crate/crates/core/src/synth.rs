//! Synthetic embedding populations with planted identities and attribute
//! directions, plus a deliberately naive LFA used as a test oracle.
//!
//! Randomness comes from ChaCha8 seeded with `rng_seed`, split into
//! independent streams:
//!
//! * stream 0: identity centers,
//! * stream 1: images per identity and per-image noise,
//! * stream `2 + a`: direction (when random) and affected identities of
//!   attribute `a`.
//!
//! Adding an attribute therefore leaves the identities and images of the
//! earlier streams unchanged.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::geometry::{normalize, MIN_NORM};
use crate::group::{Group, LatentDirection};
use crate::lfa::{Growth, GrowthStep, GrowthTrace, StopReason};
use crate::metrics::{AttributeSchema, AttributeTable};

/// Largest dataset [`reference_lfa`] accepts.
pub const REFERENCE_MAX_ROWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedAttribute {
    pub name: String,
    /// Explicit direction (normalized on use); random when absent.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    /// Additive strength `α` before re-normalization.
    pub strength: f64,
    /// Fraction of identities carrying the attribute.
    pub fraction: f64,
    /// Also move unaffected identities, by `-α·u`, so the two classes sit
    /// on opposite sides of the direction instead of "shifted" versus
    /// "untouched".
    #[serde(default)]
    pub bipolar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub dim: usize,
    pub n_identities: usize,
    pub min_images: usize,
    pub max_images: usize,
    /// Expected norm of the Gaussian offset added to an identity center.
    /// Each component has standard deviation `identity_spread / sqrt(dim)`.
    pub identity_spread: f64,
    #[serde(default)]
    pub attributes: Vec<PlantedAttribute>,
    pub rng_seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.dim < 2 {
            return bad(format!("dim must be at least 2, got {}", self.dim));
        }
        if self.n_identities == 0 {
            return bad("n_identities must be positive".into());
        }
        if self.min_images == 0 || self.max_images < self.min_images {
            return bad(format!(
                "images per identity range [{}, {}] is invalid",
                self.min_images, self.max_images
            ));
        }
        if !(self.identity_spread >= 0.0 && self.identity_spread.is_finite()) {
            return bad(format!(
                "identity_spread {} must be finite and >= 0",
                self.identity_spread
            ));
        }
        for (i, a) in self.attributes.iter().enumerate() {
            if self.attributes[..i].iter().any(|b| b.name == a.name) {
                return bad(format!("attribute {:?} listed twice", a.name));
            }
            if !(a.strength >= 0.0 && a.strength.is_finite()) {
                return bad(format!("attribute {:?}: strength must be finite and >= 0", a.name));
            }
            if !(0.0..=1.0).contains(&a.fraction) {
                return bad(format!("attribute {:?}: fraction must lie in [0, 1]", a.name));
            }
            if let Some(u) = &a.direction {
                if u.len() != self.dim {
                    return bad(format!(
                        "attribute {:?}: direction has {} components, dim is {}",
                        a.name,
                        u.len(),
                        self.dim
                    ));
                }
                if normalize(u).is_err() {
                    return bad(format!("attribute {:?}: direction is zero", a.name));
                }
            }
        }
        Ok(())
    }
}

/// Planted labels, consistent with the generated dataset row for row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub identities: Vec<usize>,
    pub attribute_names: Vec<String>,
    /// `planted[a][row]`: row carries attribute `a`.
    pub planted: Vec<Vec<bool>>,
    /// Unit direction of each attribute.
    pub directions: Vec<Vec<f64>>,
    pub strengths: Vec<f64>,
    /// Sorted identity labels carrying each attribute.
    pub affected_identities: Vec<Vec<usize>>,
}

impl GroundTruth {
    /// Rows carrying attribute `a`, ascending.
    pub fn positives(&self, a: usize) -> Vec<usize> {
        (0..self.identities.len()).filter(|&i| self.planted[a][i]).collect()
    }
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    rng
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = normalize(&v) {
            return u;
        }
    }
}

/// Generates a dataset, its ground truth, and a yes/no attribute table.
///
/// Identity centers are uniform on the unit sphere. Each image is
/// `normalize(center + noise)`; every attribute then moves the images of its
/// affected identities to `normalize(e + α·u)`, in configuration order.
pub fn generate(cfg: &SynthConfig) -> Result<(EmbeddingDataset, GroundTruth, AttributeTable)> {
    cfg.validate()?;
    let d = cfg.dim;

    let mut rng = stream(cfg.rng_seed, 0);
    let centers: Vec<Vec<f64>> = (0..cfg.n_identities).map(|_| random_unit(&mut rng, d)).collect();

    let mut rng = stream(cfg.rng_seed, 1);
    let sigma = cfg.identity_spread / (d as f64).sqrt();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut identities = Vec::new();
    for (id, c) in centers.iter().enumerate() {
        let count = rng.random_range(cfg.min_images..=cfg.max_images);
        for _ in 0..count {
            let mut e: Vec<f64> = c
                .iter()
                .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            if sigma > 0.0 {
                e = normalize(&e).unwrap_or_else(|_| c.clone());
            }
            rows.push(e);
            identities.push(id);
        }
    }

    let n = rows.len();
    let mut planted = Vec::with_capacity(cfg.attributes.len());
    let mut directions = Vec::with_capacity(cfg.attributes.len());
    let mut affected_identities = Vec::with_capacity(cfg.attributes.len());
    for (a, attr) in cfg.attributes.iter().enumerate() {
        let mut rng = stream(cfg.rng_seed, 2 + a as u64);
        let u = match &attr.direction {
            Some(u) => normalize(u)?,
            None => random_unit(&mut rng, d),
        };
        let k = (attr.fraction * cfg.n_identities as f64).round() as usize;
        let mut order: Vec<usize> = (0..cfg.n_identities).collect();
        order.shuffle(&mut rng);
        let mut chosen = order[..k].to_vec();
        chosen.sort_unstable();
        let mut is_chosen = vec![false; cfg.n_identities];
        for &c in &chosen {
            is_chosen[c] = true;
        }
        let mut flags = vec![false; n];
        for (i, e) in rows.iter_mut().enumerate() {
            let step = if is_chosen[identities[i]] {
                flags[i] = true;
                attr.strength
            } else if attr.bipolar {
                -attr.strength
            } else {
                continue;
            };
            let moved: Vec<f64> = e.iter().zip(&u).map(|(x, y)| x + step * y).collect();
            // Only an exact antipode of the step can cancel; keep e then.
            if let Ok(m) = normalize(&moved) {
                *e = m;
            }
        }
        planted.push(flags);
        directions.push(u);
        affected_identities.push(chosen);
    }

    let image_ids: Vec<String> = (0..n).map(|i| format!("img{i:06}")).collect();
    let keys: Vec<String> = identities.iter().map(|id| format!("id{id:05}")).collect();
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    let ds = EmbeddingDataset::new(image_ids, &keys, data, d)?;

    let names: Vec<String> = cfg.attributes.iter().map(|a| a.name.clone()).collect();
    let mut table = AttributeTable::new(AttributeSchema::binary(&names));
    for i in 0..n {
        let tokens: Vec<&str> = planted.iter().map(|p| if p[i] { "yes" } else { "no" }).collect();
        table.insert_tokens(ds.image_id(i), &tokens)?;
    }

    let truth = GroundTruth {
        identities: ds.identities().to_vec(),
        attribute_names: names,
        planted,
        directions,
        strengths: cfg.attributes.iter().map(|a| a.strength).collect(),
        affected_identities,
    };
    Ok((ds, truth, table))
}

/// Literal LFA transcription used to check the optimized engine.
///
/// Every iteration recounts identities, rebuilds the direction as the mean
/// over identities of the per-identity mean embedding (including the `1/C`
/// factor), rescans all rows outside the group in index order with plain
/// loops, and stops when the best normalized projection is below `tau`.
pub fn reference_lfa(ds: &EmbeddingDataset, seed: &Group, tau: f64) -> Result<Growth> {
    if ds.len() > REFERENCE_MAX_ROWS {
        return Err(Error::InvalidArgument(format!(
            "reference LFA is limited to {REFERENCE_MAX_ROWS} rows, dataset has {}",
            ds.len()
        )));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidThreshold(tau));
    }
    if seed.is_empty() {
        return Err(Error::EmptyGroup);
    }
    seed.check_bounds(ds.len())?;

    let mut members: Vec<usize> = seed.members().to_vec();
    let mut steps = Vec::new();
    loop {
        // Identity histogram of the current members.
        let mut labels: Vec<usize> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &m in &members {
            let l = ds.identity(m);
            match labels.iter().position(|&x| x == l) {
                Some(p) => counts[p] += 1,
                None => {
                    labels.push(l);
                    counts.push(1);
                }
            }
        }
        let c = labels.len() as f64;
        let mut v = vec![0.0; ds.dim()];
        for &m in &members {
            let p = labels.iter().position(|&x| x == ds.identity(m)).expect("counted");
            for (k, x) in ds.row(m).iter().enumerate() {
                v[k] += x / (c * counts[p] as f64);
            }
        }
        let mut vv = 0.0;
        for x in &v {
            vv += x * x;
        }
        let vn = vv.sqrt();
        if !(vn > MIN_NORM / c) {
            return Err(Error::DegenerateDirection { norm: vn });
        }

        let mut best: Option<(usize, f64)> = None;
        for k in 0..ds.len() {
            if members.contains(&k) {
                continue;
            }
            let mut s = 0.0;
            for (x, y) in ds.row(k).iter().zip(&v) {
                s += x * y;
            }
            let p = s / vn;
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((k, p));
            }
        }
        let finish = |members: Vec<usize>, steps, stop_projection, stop_reason| -> Result<Growth> {
            let mut group = Group::new(members, seed.provenance)?;
            group.direction = Some(LatentDirection::new(v.clone(), group.len(), labels.len())?);
            group.threshold_used = Some(tau);
            Ok(Growth {
                group,
                trace: GrowthTrace {
                    steps,
                    stop_projection,
                    stop_reason,
                },
            })
        };
        match best {
            None => return finish(members, steps, None, StopReason::PoolExhausted),
            Some((_, p)) if p < tau => return finish(members, steps, Some(p), StopReason::BelowThreshold),
            Some((k, p)) => {
                steps.push(GrowthStep {
                    index: k,
                    projection: p,
                    identity_count: labels.len(),
                    group_size: members.len(),
                });
                members.push(k);
            }
        }
    }
}
