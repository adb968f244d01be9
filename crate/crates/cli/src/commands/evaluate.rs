use std::path::PathBuf;

use lfa_core::metrics::{
    bias_report as compute_bias, group_coherence, method_coherence, random_group, GroupRole, LabeledGroup,
};
use lfa_core::SeedProvenance;
use serde::Serialize;

use super::{check, Ctx};
use crate::cli::{BiasArgs, CoherenceArgs};
use crate::config::set;
use crate::error::{CliError, CliResult};
use crate::format::attributes::read_attribute_csv;
use crate::format::report::write_fmr_curves;

/// Name of the seeded random reference group in bias reports.
pub const RANDOM_REFERENCE: &str = "random";

#[derive(Debug, Serialize)]
struct GroupCoherence {
    id: String,
    size: usize,
    coherence: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MethodResult {
    name: String,
    path: String,
    coherence: f64,
    total_distance: u64,
    total_pairs: u64,
    eligible_groups: usize,
    skipped_groups: usize,
    groups: Vec<GroupCoherence>,
}

#[derive(Debug, Serialize)]
struct CoherenceResult {
    /// How per-group figures are combined into one number per method.
    pooling: &'static str,
    unknown_handling: &'static str,
    methods: Vec<MethodResult>,
}

fn split_label(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => (spec.to_string(), PathBuf::from(spec)),
    }
}

pub fn coherence(ctx: &mut Ctx, args: CoherenceArgs) -> CliResult<()> {
    let ds = ctx.dataset(&args.data.dataset)?;
    let table = read_attribute_csv(&args.attributes)?;
    let bytes = std::fs::read(&args.attributes).map_err(|e| CliError::read(&args.attributes, e))?;
    ctx.record(vec![(args.attributes.clone(), bytes)]);

    let mut methods = Vec::new();
    for spec in &args.groups {
        let (name, path) = split_label(spec);
        let named = ctx.groups(&path, &ds, SeedProvenance::UserSupplied)?;
        let groups: Vec<_> = named.iter().map(|g| g.group.clone()).collect();
        let m = method_coherence(&ds, &groups, &table)?;
        methods.push(MethodResult {
            name,
            path: path.display().to_string(),
            coherence: m.coherence,
            total_distance: m.total_distance,
            total_pairs: m.total_pairs,
            eligible_groups: m.eligible_groups,
            skipped_groups: m.skipped_groups,
            groups: named
                .iter()
                .map(|g| GroupCoherence {
                    id: g.id.clone(),
                    size: g.group.len(),
                    coherence: group_coherence(&ds, &g.group, &table).ok(),
                })
                .collect(),
        });
    }
    let result = CoherenceResult {
        pooling: "pair-pooled",
        unknown_handling: "skip-attribute",
        methods,
    };
    ctx.report("coherence", "coherence_report.json", &result)?;
    println!("{:<24} {:>10} {:>8} {:>10}", "method", "coherence", "groups", "pairs");
    for m in &result.methods {
        println!(
            "{:<24} {:>10.4} {:>8} {:>10}",
            m.name, m.coherence, m.eligible_groups, m.total_pairs
        );
    }
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `bias_report.json`, a per-group `bias_table.csv` and `fmr_curves.csv`.
pub fn bias_report(ctx: &mut Ctx, args: BiasArgs) -> CliResult<()> {
    let m = &mut ctx.config.metrics;
    set(&mut m.fixed_threshold, args.fixed_threshold);
    set(&mut m.bootstrap_iterations, args.bootstrap);
    set(&mut m.ci_method, args.ci.map(Into::into));
    set(&mut m.fmr_targets, args.fmr_targets);
    m.random_reference |= args.random_reference;
    let metrics = m.clone();
    let randomized = metrics.bootstrap_iterations > 0 || metrics.random_reference;
    let seed = if randomized {
        ctx.config.require_seed("bias-report")?
    } else {
        ctx.config.seed.unwrap_or(0)
    };
    let bias_cfg = metrics.bias_config(seed);
    bias_cfg.validate()?;

    let ds = ctx.dataset(&args.data.dataset)?;
    let named = ctx.groups(&args.groups, &ds, SeedProvenance::UserSupplied)?;
    check(!named.is_empty(), format!("{} holds no groups", args.groups.display()))?;
    if let Some(x) = args.exclude.iter().find(|x| !named.iter().any(|g| &g.id == *x)) {
        return Err(CliError::validation(
            "cli::InvalidArgument",
            format!("--exclude {x:?} names no group"),
        ));
    }
    let mut labeled: Vec<LabeledGroup> = named
        .iter()
        .map(|g| LabeledGroup {
            name: g.id.clone(),
            group: g.group.clone(),
            role: if args.exclude.contains(&g.id) {
                GroupRole::Excluded
            } else {
                GroupRole::Comparison
            },
        })
        .collect();
    if metrics.random_reference {
        check(
            !named.iter().any(|g| g.id == RANDOM_REFERENCE),
            format!("group id {RANDOM_REFERENCE:?} is reserved for the random reference"),
        )?;
        let sizes: Vec<usize> = labeled
            .iter()
            .filter(|g| g.role == GroupRole::Comparison)
            .map(|g| g.group.len())
            .collect();
        let sizes = if sizes.is_empty() {
            labeled.iter().map(|g| g.group.len()).collect()
        } else {
            sizes
        };
        let size = (sizes.iter().sum::<usize>() as f64 / sizes.len() as f64).round() as usize;
        labeled.push(LabeledGroup {
            name: RANDOM_REFERENCE.into(),
            group: random_group(&ds, size.max(2), seed)?,
            role: GroupRole::Reference,
        });
    }

    let report = compute_bias(&ds, &labeled, &bias_cfg)?;
    let dir = ctx.out_dir()?;
    ctx.report("bias-report", "bias_report.json", &report)?;

    let grid = bias_cfg.curve_grid();
    let curves: Vec<(String, Vec<f64>)> = report
        .groups
        .iter()
        .filter(|g| !g.fmr_curve.is_empty())
        .map(|g| (g.name.clone(), g.fmr_curve.iter().map(|p| p.1).collect()))
        .collect();
    write_fmr_curves(&dir.join("fmr_curves.csv"), &grid, &curves)?;

    let table_path = dir.join("bias_table.csv");
    let mut w = csv::Writer::from_path(&table_path).map_err(|e| CliError::write(&table_path, e))?;
    let fail = |e: csv::Error| CliError::write(&table_path, e);
    let mut header: Vec<String> = [
        "group",
        "role",
        "n_images",
        "n_identities",
        "fmr_at_threshold",
        "fmr_halfwidth",
        "fmr_ratio_to_reference",
        "eer",
        "impostor_mean",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(bias_cfg.fmr_targets.iter().map(|t| format!("fnmr_at_fmr_{t}")));
    w.write_record(&header).map_err(fail)?;
    for g in &report.groups {
        let role = serde_json::to_value(g.role).unwrap();
        let mut rec = vec![
            g.name.clone(),
            role.as_str().unwrap_or_default().to_string(),
            g.n_images.to_string(),
            g.n_identities.to_string(),
            cell(g.fmr_at_threshold),
            cell(g.bootstrap.as_ref().map(|b| b.halfwidth)),
            cell(g.fmr_ratio_to_reference),
            cell(g.eer),
            cell(g.impostor_mean),
        ];
        rec.extend(g.fnmr_at_fmr.iter().map(|r| cell(r.fnmr)));
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::write(&table_path, e))?;

    let t = bias_cfg.fixed_threshold;
    println!(
        "{:<14} {:>7} {:>6} {:>22} {:>8} {:>9}",
        "group",
        "images",
        "ids",
        format!("FMR@{t}"),
        "EER",
        "ratio"
    );
    for g in &report.groups {
        let fmr = match (g.fmr_at_threshold, &g.bootstrap) {
            (Some(f), Some(b)) => format!("{f:.4} ± {:.4}", b.halfwidth),
            (Some(f), None) => format!("{f:.4}"),
            (None, _) => "-".into(),
        };
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<14} {:>7} {:>6} {:>22} {:>8} {:>9}",
            g.name,
            g.n_images,
            g.n_identities,
            fmr,
            opt(g.eer),
            opt(g.fmr_ratio_to_reference)
        );
    }
    if !report.sigma.groups.is_empty() {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "sigma over {} groups: EER {}, FMR@{t} {}",
            report.sigma.groups.len(),
            opt(report.sigma.eer),
            opt(report.sigma.fmr_at_threshold)
        );
    }
    Ok(())
}
