//! Per-group bias figures and their spread across groups.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::group::{Group, SeedProvenance};
use crate::metrics::bootstrap::{bootstrap_fmr_ci, BootstrapCi, CiMethod};
use crate::metrics::scores::{collect_scores, eer, fmr_at, fmr_curve, fnmr_at_fmr, impostor_mean, threshold_grid};

pub const DEFAULT_FIXED_THRESHOLD: f64 = 0.2;
pub const DEFAULT_FMR_TARGETS: [f64; 2] = [0.01, 0.001];
pub const DEFAULT_BOOTSTRAP_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasConfig {
    pub fixed_threshold: f64,
    pub fmr_targets: Vec<f64>,
    /// Zero disables the bootstrap.
    pub bootstrap_iterations: usize,
    pub bootstrap_seed: u64,
    pub ci_method: CiMethod,
    pub curve_start: f64,
    pub curve_end: f64,
    pub curve_steps: usize,
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self {
            fixed_threshold: DEFAULT_FIXED_THRESHOLD,
            fmr_targets: DEFAULT_FMR_TARGETS.to_vec(),
            bootstrap_iterations: DEFAULT_BOOTSTRAP_ITERATIONS,
            bootstrap_seed: 0,
            ci_method: CiMethod::Normal,
            curve_start: 0.0,
            curve_end: 0.5,
            curve_steps: 51,
        }
    }
}

impl BiasConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.fixed_threshold.is_finite() {
            return Err(Error::InvalidArgument("fixed threshold must be finite".into()));
        }
        if let Some(t) = self.fmr_targets.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidArgument(format!("FMR target {t} is outside (0, 1]")));
        }
        if self.bootstrap_iterations == 1 {
            return Err(Error::InvalidArgument("bootstrap needs at least 2 iterations".into()));
        }
        if !(self.curve_start.is_finite() && self.curve_end.is_finite())
            || self.curve_end < self.curve_start
            || self.curve_steps == 0
        {
            return Err(Error::InvalidArgument("FMR curve grid is invalid".into()));
        }
        Ok(())
    }

    pub fn curve_grid(&self) -> Vec<f64> {
        threshold_grid(self.curve_start, self.curve_end, self.curve_steps)
    }
}

/// How a group takes part in the cross-group summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupRole {
    /// Counted in the cross-group standard deviations.
    #[default]
    Comparison,
    /// The random baseline that ratios are taken against; not in σ.
    Reference,
    /// Reported but left out of σ.
    Excluded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGroup {
    pub name: String,
    pub group: Group,
    pub role: GroupRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRate {
    pub fmr_target: f64,
    pub fnmr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBias {
    pub name: String,
    pub role: GroupRole,
    pub n_images: usize,
    pub n_identities: usize,
    pub genuine_pairs: usize,
    pub impostor_pairs: usize,
    pub impostor_mean: Option<f64>,
    pub eer: Option<f64>,
    pub fnmr_at_fmr: Vec<TargetRate>,
    pub fmr_at_threshold: Option<f64>,
    /// `fmr_at_threshold` divided by the reference group's value.
    pub fmr_ratio_to_reference: Option<f64>,
    pub bootstrap: Option<BootstrapCi>,
    pub fmr_curve: Vec<(f64, f64)>,
    /// Module-qualified codes of metrics that could not be computed.
    pub issues: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadSummary {
    /// Names of the groups the deviations were taken over.
    pub groups: Vec<String>,
    pub eer: Option<f64>,
    pub fnmr_at_fmr: Vec<TargetRate>,
    pub fmr_at_threshold: Option<f64>,
    pub impostor_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub config: BiasConfig,
    pub groups: Vec<GroupBias>,
    pub sigma: SpreadSummary,
}

/// Population standard deviation (divides by the count).
pub fn population_std(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt())
}

fn note<T>(issues: &mut Vec<String>, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            let code = e.code().to_string();
            if !issues.contains(&code) {
                issues.push(code);
            }
            None
        }
    }
}

fn group_bias(ds: &EmbeddingDataset, lg: &LabeledGroup, cfg: &BiasConfig, grid: &[f64]) -> Result<GroupBias> {
    let scores = collect_scores(ds, &lg.group)?;
    let mut issues = Vec::new();
    let impostor_mean = note(&mut issues, impostor_mean(&scores));
    let eer = note(&mut issues, eer(&scores));
    let fnmr_at_fmr = cfg
        .fmr_targets
        .iter()
        .map(|&target| TargetRate {
            fmr_target: target,
            fnmr: note(&mut issues, fnmr_at_fmr(&scores, target)),
        })
        .collect();
    let fmr_at_threshold = note(&mut issues, fmr_at(&scores, cfg.fixed_threshold));
    let fmr_curve = note(&mut issues, fmr_curve(&scores, grid)).unwrap_or_default();
    let bootstrap = if cfg.bootstrap_iterations >= 2 && !scores.impostor.is_empty() {
        note(
            &mut issues,
            bootstrap_fmr_ci(
                ds,
                &lg.group,
                cfg.fixed_threshold,
                cfg.bootstrap_iterations,
                cfg.bootstrap_seed,
                cfg.ci_method,
            ),
        )
    } else {
        None
    };
    Ok(GroupBias {
        name: lg.name.clone(),
        role: lg.role,
        n_images: scores.n_images,
        n_identities: scores.n_identities,
        genuine_pairs: scores.genuine.len(),
        impostor_pairs: scores.impostor.len(),
        impostor_mean,
        eer,
        fnmr_at_fmr,
        fmr_at_threshold,
        fmr_ratio_to_reference: None,
        bootstrap,
        fmr_curve,
        issues,
    })
}

/// Computes every bias figure for each group, the FMR ratio against the
/// reference group (if one is marked), and population standard deviations
/// over the comparison groups.
///
/// Missing genuine or impostor pairs are not fatal: the affected figures
/// are left empty and the error code is listed under `issues`.
pub fn bias_report(ds: &EmbeddingDataset, groups: &[LabeledGroup], cfg: &BiasConfig) -> Result<BiasReport> {
    cfg.validate()?;
    if groups.iter().filter(|g| g.role == GroupRole::Reference).count() > 1 {
        return Err(Error::InvalidArgument("at most one reference group is allowed".into()));
    }
    let grid = cfg.curve_grid();
    let mut rows = groups
        .iter()
        .map(|g| group_bias(ds, g, cfg, &grid))
        .collect::<Result<Vec<_>>>()?;

    let reference = rows
        .iter()
        .find(|r| r.role == GroupRole::Reference)
        .and_then(|r| r.fmr_at_threshold);
    if let Some(base) = reference.filter(|&b| b > 0.0) {
        for r in &mut rows {
            r.fmr_ratio_to_reference = r.fmr_at_threshold.map(|f| f / base);
        }
    }

    let comparison: Vec<&GroupBias> = rows.iter().filter(|r| r.role == GroupRole::Comparison).collect();
    let spread = |f: &dyn Fn(&GroupBias) -> Option<f64>| {
        let v: Vec<f64> = comparison.iter().filter_map(|r| f(r)).collect();
        population_std(&v)
    };
    let sigma = SpreadSummary {
        groups: comparison.iter().map(|r| r.name.clone()).collect(),
        eer: spread(&|r| r.eer),
        fnmr_at_fmr: cfg
            .fmr_targets
            .iter()
            .enumerate()
            .map(|(i, &target)| TargetRate {
                fmr_target: target,
                fnmr: spread(&|r| r.fnmr_at_fmr[i].fnmr),
            })
            .collect(),
        fmr_at_threshold: spread(&|r| r.fmr_at_threshold),
        impostor_mean: spread(&|r| r.impostor_mean),
    };
    Ok(BiasReport {
        config: cfg.clone(),
        groups: rows,
        sigma,
    })
}

/// A uniformly random group of `size` distinct rows, sorted ascending.
pub fn random_group(ds: &EmbeddingDataset, size: usize, seed: u64) -> Result<Group> {
    if size == 0 || size > ds.len() {
        return Err(Error::InvalidN { n: size, len: ds.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = sample(&mut rng, ds.len(), size).into_vec();
    members.sort_unstable();
    Group::new(members, SeedProvenance::Baseline)
}
