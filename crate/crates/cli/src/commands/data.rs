use lfa_core::synth::generate;
use lfa_core::SeedProvenance;
use serde::Serialize;

use super::Ctx;
use crate::cli::ValidateArgs;
use crate::config::set;
use crate::error::{CliError, CliResult};
use crate::format::attributes::{read_attribute_csv, write_attribute_csv};
use crate::format::embedding::save_dataset;
use crate::format::report::write_json;

#[derive(Debug, Serialize)]
struct DatasetSummary {
    rows: usize,
    dim: usize,
    identities: usize,
    renormalized: usize,
}

#[derive(Debug, Serialize)]
struct ValidateResult {
    dataset: DatasetSummary,
    attributes: Option<AttributeSummary>,
    groups: Vec<GroupFileSummary>,
}

#[derive(Debug, Serialize)]
struct AttributeSummary {
    images: usize,
    attributes: Vec<String>,
}

#[derive(Debug, Serialize)]
struct GroupFileSummary {
    path: String,
    groups: usize,
    members: usize,
}

pub fn validate(ctx: &mut Ctx, args: ValidateArgs) -> CliResult<()> {
    let ds = ctx.dataset(&args.data.dataset)?;
    let summary = DatasetSummary {
        rows: ds.len(),
        dim: ds.dim(),
        identities: ds.identity_count(),
        renormalized: ds.renormalized_count(),
    };
    println!(
        "dataset ok: {} rows, d = {}, {} identities ({} re-normalized)",
        summary.rows, summary.dim, summary.identities, summary.renormalized
    );

    let attributes = match &args.attributes {
        None => None,
        Some(path) => {
            let table = read_attribute_csv(path)?;
            if let Some(id) = table.image_ids().iter().find(|id| ds.index_of(id).is_none()) {
                return Err(CliError::validation(
                    "cli::InvalidAttributeFile",
                    format!("{}: image {id:?} is not in the dataset", path.display()),
                ));
            }
            println!(
                "attributes ok: {} images, {} attributes",
                table.len(),
                table.schema().len()
            );
            Some(AttributeSummary {
                images: table.len(),
                attributes: table.schema().names().map(str::to_string).collect(),
            })
        }
    };

    let mut groups = Vec::new();
    for path in &args.groups {
        let g = ctx.groups(path, &ds, SeedProvenance::UserSupplied)?;
        let members = g.iter().map(|g| g.group.len()).sum();
        println!(
            "groups ok: {} ({} groups, {members} memberships)",
            path.display(),
            g.len()
        );
        groups.push(GroupFileSummary {
            path: path.display().to_string(),
            groups: g.len(),
            members,
        });
    }

    if ctx.config.output_dir.is_some() {
        let result = ValidateResult {
            dataset: summary,
            attributes,
            groups,
        };
        ctx.report("validate", "validation.json", &result)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SynthResult {
    rows: usize,
    identities: usize,
    positives: Vec<(String, usize)>,
}

/// Writes a dataset directory plus `attributes.csv` and `ground_truth.json`.
pub fn synth(ctx: &mut Ctx) -> CliResult<()> {
    let mut cfg = ctx
        .config
        .synth
        .clone()
        .ok_or_else(|| CliError::validation("cli::InvalidConfig", "`synth` needs a [synth] section in --config"))?;
    set(&mut cfg.rng_seed, ctx.config.seed);
    ctx.config.synth = Some(cfg.clone());
    let (ds, truth, table) = generate(&cfg)?;
    let dir = ctx.out_dir()?;
    save_dataset(&dir, &ds)?;
    write_attribute_csv(&dir.join("attributes.csv"), &table)?;
    write_json(&dir.join("ground_truth.json"), &truth)?;
    let result = SynthResult {
        rows: ds.len(),
        identities: ds.identity_count(),
        positives: truth
            .attribute_names
            .iter()
            .enumerate()
            .map(|(a, n)| (n.clone(), truth.positives(a).len()))
            .collect(),
    };
    ctx.report("synth", "synth_report.json", &result)?;
    println!(
        "synthesized {} rows over {} identities (d = {}) into {}",
        result.rows,
        result.identities,
        cfg.dim,
        dir.display()
    );
    for (name, n) in &result.positives {
        println!("  {name}: {n} planted rows");
    }
    Ok(())
}
