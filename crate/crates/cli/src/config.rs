//! The run configuration: one TOML file shared by every command, with
//! command-line flags taking precedence over file values.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//!
//! [init]
//! graph_threshold = 0.5
//!
//! [lfa]
//! target_size = 100
//!
//! [metrics]
//! fixed_threshold = 0.2
//! bootstrap_iterations = 1000
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use lfa_core::init::{SeedFilter, DEFAULT_GRAPH_THRESHOLD};
use lfa_core::metrics::{
    BiasConfig, CiMethod, DEFAULT_BOOTSTRAP_ITERATIONS, DEFAULT_FIXED_THRESHOLD, DEFAULT_FMR_TARGETS,
};
use lfa_core::synth::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every randomized step (k-means, bootstrap, random reference
    /// groups). Such commands refuse to run without one.
    pub seed: Option<u64>,
    /// Where outputs go. Not part of the embedded config: it cannot change
    /// any result.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
    /// Worker cap. Results do not depend on it, so it is not embedded either.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
    pub init: InitSection,
    pub lfa: LfaSection,
    pub baseline: BaselineSection,
    pub metrics: MetricsSection,
    pub traverse: TraverseSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    pub graph_threshold: f64,
    pub min_size: usize,
    pub max_size: Option<usize>,
    pub min_identities: usize,
    pub max_seeds: Option<usize>,
}

impl Default for InitSection {
    fn default() -> Self {
        let f = SeedFilter::default();
        Self {
            graph_threshold: DEFAULT_GRAPH_THRESHOLD,
            min_size: f.min_size,
            max_size: f.max_size,
            min_identities: f.min_identities,
            max_seeds: f.max_seeds,
        }
    }
}

impl InitSection {
    pub fn filter(&self) -> SeedFilter {
        SeedFilter {
            min_size: self.min_size,
            max_size: self.max_size,
            min_identities: self.min_identities,
            max_seeds: self.max_seeds,
        }
    }
}

/// Either `tau` or `target_size` (which searches for a matching `tau`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LfaSection {
    pub tau: Option<f64>,
    pub target_size: Option<usize>,
    pub max_members: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    /// k-means cluster count; derived from `target_size` when absent.
    pub k: Option<usize>,
    /// NNS neighborhood size; falls back to `target_size`.
    pub n: Option<usize>,
    pub target_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub fixed_threshold: f64,
    pub fmr_targets: Vec<f64>,
    /// Zero disables the bootstrap.
    pub bootstrap_iterations: usize,
    pub ci_method: CiMethod,
    pub curve_start: f64,
    pub curve_end: f64,
    pub curve_steps: usize,
    /// Add a seeded random group, sized to the mean comparison group, as
    /// the reference for FMR ratios.
    pub random_reference: bool,
}

impl Default for MetricsSection {
    fn default() -> Self {
        let b = BiasConfig::default();
        Self {
            fixed_threshold: DEFAULT_FIXED_THRESHOLD,
            fmr_targets: DEFAULT_FMR_TARGETS.to_vec(),
            bootstrap_iterations: DEFAULT_BOOTSTRAP_ITERATIONS,
            ci_method: b.ci_method,
            curve_start: b.curve_start,
            curve_end: b.curve_end,
            curve_steps: b.curve_steps,
            random_reference: false,
        }
    }
}

impl MetricsSection {
    pub fn bias_config(&self, seed: u64) -> BiasConfig {
        BiasConfig {
            fixed_threshold: self.fixed_threshold,
            fmr_targets: self.fmr_targets.clone(),
            bootstrap_iterations: self.bootstrap_iterations,
            bootstrap_seed: seed,
            ci_method: self.ci_method,
            curve_start: self.curve_start,
            curve_end: self.curve_end,
            curve_steps: self.curve_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraverseSection {
    pub strengths: Vec<f64>,
}

impl Default for TraverseSection {
    fn default() -> Self {
        Self {
            strengths: vec![-0.5, 0.5],
        }
    }
}

impl RunConfig {
    /// Reads the config file, or returns defaults when no path is given.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::validation("cli::InvalidConfig", format!("{}: {}", path.display(), e.message())))
    }

    /// The seed, or a validation error naming the command that needs it.
    pub fn require_seed(&self, command: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| {
            CliError::validation(
                "cli::MissingSeed",
                format!("`{command}` is randomized: pass --seed or set `seed` in the config"),
            )
        })
    }

    pub fn require_output_dir(&self) -> CliResult<&Path> {
        self.output_dir
            .as_deref()
            .ok_or_else(|| CliError::validation("cli::MissingOutput", "pass --out or set `output_dir` in the config"))
    }
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// Overwrites an optional setting when the flag was given.
pub fn set_opt<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}
