//! One function per subcommand. Each resolves its settings, reads inputs,
//! writes machine-readable outputs under the output directory and prints a
//! short human summary.

mod annotate;
mod data;
mod evaluate;
mod grouping;
mod traverse;

use std::fs;
use std::path::{Path, PathBuf};

use lfa_core::{EmbeddingDataset, SeedProvenance};
use serde::Serialize;

use crate::cli::{BaselineCommand, Cli, Command};
use crate::config::{set_opt, RunConfig};
use crate::error::{CliError, CliResult};
use crate::format::embedding::load_dataset;
use crate::format::groups::{read_groups, NamedGroup};
use crate::format::report::{write_json, FileBytes, InputDigest, Report};

/// Resolved settings plus every input file read so far.
pub struct Ctx {
    pub config: RunConfig,
    inputs: Vec<FileBytes>,
}

impl Ctx {
    pub fn new(config: RunConfig) -> Self {
        Self {
            config,
            inputs: Vec::new(),
        }
    }

    pub fn record(&mut self, files: Vec<FileBytes>) {
        self.inputs.extend(files);
    }

    pub fn dataset(&mut self, dir: &Path) -> CliResult<EmbeddingDataset> {
        let (ds, files) = load_dataset(dir)?;
        self.record(files);
        Ok(ds)
    }

    pub fn groups(
        &mut self,
        path: &Path,
        ds: &EmbeddingDataset,
        provenance: SeedProvenance,
    ) -> CliResult<Vec<NamedGroup>> {
        let groups = read_groups(path, ds, provenance)?;
        let bytes = fs::read(path).map_err(|e| CliError::read(path, e))?;
        self.record(vec![(path.to_path_buf(), bytes)]);
        Ok(groups)
    }

    /// Creates the output directory if needed.
    pub fn out_dir(&self) -> CliResult<PathBuf> {
        let dir = self.config.require_output_dir()?.to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| CliError::write(&dir, e))?;
        Ok(dir)
    }

    /// Writes `result` wrapped with version, config and input digests.
    pub fn report<R: Serialize>(&self, command: &str, file: &str, result: &R) -> CliResult<PathBuf> {
        let path = self.out_dir()?.join(file);
        let inputs = InputDigest::all(&self.inputs);
        write_json(&path, &Report::new(command, &self.config, &inputs, result))?;
        Ok(path)
    }
}

/// Applies the global flags to the loaded config and runs the command on a
/// pool of the requested size.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut config = RunConfig::load(cli.global.config.as_deref())?;
    set_opt(&mut config.seed, cli.global.seed);
    set_opt(&mut config.output_dir, cli.global.out);
    set_opt(&mut config.threads, cli.global.threads);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        if n == 0 {
            return Err(CliError::validation(
                "cli::InvalidArgument",
                "--threads must be at least 1",
            ));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::runtime("cli::ThreadPool", e.to_string()))?;
    let mut ctx = Ctx::new(config);
    pool.install(|| match cli.command {
        Command::Validate(a) => data::validate(&mut ctx, a),
        Command::Synth => data::synth(&mut ctx),
        Command::InitGroups(a) => grouping::init_groups(&mut ctx, a),
        Command::LfaRun(a) => grouping::lfa_run(&mut ctx, a),
        Command::Baseline(BaselineCommand::Kmeans(a)) => grouping::kmeans(&mut ctx, a),
        Command::Baseline(BaselineCommand::Nns(a)) => grouping::nns(&mut ctx, a),
        Command::MatchSize(a) => grouping::match_size(&mut ctx, a),
        Command::Coherence(a) => evaluate::coherence(&mut ctx, a),
        Command::BiasReport(a) => evaluate::bias_report(&mut ctx, a),
        Command::Consensus(a) => annotate::consensus(&mut ctx, a),
        Command::Traverse(a) => traverse::traverse(&mut ctx, a),
    })
}

/// Rejects values outside a flag's domain before any work starts.
pub(crate) fn check(ok: bool, message: impl Into<String>) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::validation("cli::InvalidArgument", message))
    }
}
