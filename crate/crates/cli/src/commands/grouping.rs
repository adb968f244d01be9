use lfa_core::baselines::{self, kmeans_k_for_size, match_lfa_tau, nns_groups, TauMatch};
use lfa_core::init::{build_similarity_graph, connected_components};
use lfa_core::lfa::{run_all_with, GrowOptions, GrowthTrace};
use lfa_core::{EmbeddingDataset, SeedProvenance};
use serde::Serialize;

use super::{check, Ctx};
use crate::cli::{InitArgs, KmeansArgs, LfaArgs, MatchArgs, ModeArg, NnsArgs};
use crate::config::{set, set_opt};
use crate::error::{CliError, CliResult};
use crate::format::directions::write_directions;
use crate::format::groups::{numbered, write_groups, NamedGroup};

#[derive(Debug, Serialize)]
struct GroupSummary {
    id: String,
    size: usize,
    identities: usize,
}

fn summarize(ds: &EmbeddingDataset, groups: &[NamedGroup]) -> Vec<GroupSummary> {
    groups
        .iter()
        .map(|g| {
            let mut ids: Vec<usize> = g.group.members().iter().map(|&m| ds.identity(m)).collect();
            ids.sort_unstable();
            ids.dedup();
            GroupSummary {
                id: g.id.clone(),
                size: g.group.len(),
                identities: ids.len(),
            }
        })
        .collect()
}

fn mean_size(groups: &[NamedGroup]) -> f64 {
    if groups.is_empty() {
        return 0.0;
    }
    groups.iter().map(|g| g.group.len()).sum::<usize>() as f64 / groups.len() as f64
}

#[derive(Debug, Serialize)]
struct InitResult {
    edges: usize,
    components: usize,
    seeds: Vec<GroupSummary>,
}

/// Writes `seeds.csv`: filtered components of the similarity graph.
pub fn init_groups(ctx: &mut Ctx, args: InitArgs) -> CliResult<()> {
    let init = &mut ctx.config.init;
    set(&mut init.graph_threshold, args.graph_threshold);
    set(&mut init.min_size, args.min_size);
    set_opt(&mut init.max_size, args.max_size);
    set(&mut init.min_identities, args.min_identities);
    set_opt(&mut init.max_seeds, args.max_seeds);
    let t = init.graph_threshold;
    check(
        (-1.0..=1.0).contains(&t),
        format!("graph threshold {t} is outside [-1, 1]"),
    )?;
    let filter = init.filter();

    let ds = ctx.dataset(&args.data.dataset)?;
    let graph = build_similarity_graph(&ds, t)?;
    let components = connected_components(&graph);
    let n_components = components.len();
    let seeds = numbered(filter.apply(&ds, components));

    let dir = ctx.out_dir()?;
    write_groups(&dir.join("seeds.csv"), &ds, &seeds)?;
    let result = InitResult {
        edges: graph.edge_count(),
        components: n_components,
        seeds: summarize(&ds, &seeds),
    };
    ctx.report("init-groups", "init_report.json", &result)?;
    println!(
        "graph at t = {t}: {} edges, {n_components} components; kept {} seeds (mean size {:.2})",
        result.edges,
        seeds.len(),
        mean_size(&seeds)
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct GrownGroup {
    id: String,
    seed_size: usize,
    size: usize,
    identities: usize,
    trace: GrowthTrace,
}

#[derive(Debug, Serialize)]
struct FailedSeed {
    id: String,
    error: String,
    message: String,
}

#[derive(Debug, Serialize)]
struct LfaResult {
    tau: f64,
    tau_search: Option<TauMatch>,
    mean_size: f64,
    groups: Vec<GrownGroup>,
    failed: Vec<FailedSeed>,
}

/// Writes `groups.csv`, the direction blob and manifest, and `lfa_report.json`.
pub fn lfa_run(ctx: &mut Ctx, args: LfaArgs) -> CliResult<()> {
    let lfa = &mut ctx.config.lfa;
    if args.tau.is_some() {
        lfa.target_size = None;
    }
    if args.target_size.is_some() {
        lfa.tau = None;
    }
    set_opt(&mut lfa.tau, args.tau);
    set_opt(&mut lfa.target_size, args.target_size);
    set_opt(&mut lfa.max_members, args.max_members);
    let lfa = lfa.clone();
    match (lfa.tau, lfa.target_size) {
        (Some(t), None) => check(t > 0.0 && t < 1.0, format!("tau {t} is outside (0, 1)"))?,
        (None, Some(n)) => check(n > 0, "target size must be positive")?,
        _ => {
            return Err(CliError::validation(
                "cli::InvalidArgument",
                "give exactly one of tau or target_size (flag or [lfa] config)",
            ))
        }
    }

    let ds = ctx.dataset(&args.data.dataset)?;
    let seeds = ctx.groups(&args.seeds, &ds, SeedProvenance::UserSupplied)?;
    check(
        !seeds.is_empty(),
        format!("{} holds no seed groups", args.seeds.display()),
    )?;
    let seed_groups: Vec<_> = seeds.iter().map(|s| s.group.clone()).collect();
    let (tau, tau_search) = match lfa.tau {
        Some(t) => (t, None),
        None => {
            let m = match_lfa_tau(&ds, &seed_groups, lfa.target_size.unwrap())?;
            (m.tau, Some(m))
        }
    };
    let runs = run_all_with(
        &ds,
        tau,
        &seed_groups,
        GrowOptions {
            max_members: lfa.max_members,
        },
    );

    let mut grown = Vec::new();
    let mut report = Vec::new();
    let mut failed = Vec::new();
    let mut directions = Vec::new();
    for (seed, run) in seeds.iter().zip(runs) {
        match run {
            Ok(g) => {
                let direction = g.group.direction.clone().expect("grown groups carry a direction");
                directions.push((seed.id.clone(), direction, g.group.threshold_used));
                report.push(GrownGroup {
                    id: seed.id.clone(),
                    seed_size: seed.group.len(),
                    size: g.group.len(),
                    identities: 0,
                    trace: g.trace,
                });
                grown.push(NamedGroup {
                    id: seed.id.clone(),
                    group: g.group,
                });
            }
            Err(e) => failed.push(FailedSeed {
                id: seed.id.clone(),
                error: e.code().to_string(),
                message: e.to_string(),
            }),
        }
    }
    for (r, s) in report.iter_mut().zip(summarize(&ds, &grown)) {
        r.identities = s.identities;
    }

    let dir = ctx.out_dir()?;
    write_groups(&dir.join("groups.csv"), &ds, &grown)?;
    write_directions(&dir, ds.dim(), &directions)?;
    let result = LfaResult {
        tau,
        tau_search,
        mean_size: mean_size(&grown),
        groups: report,
        failed,
    };
    ctx.report("lfa-run", "lfa_report.json", &result)?;
    println!(
        "grew {} of {} seeds at tau = {tau}: mean size {:.2}",
        grown.len(),
        seeds.len(),
        result.mean_size
    );
    for f in &result.failed {
        println!("  seed {} failed: {} ({})", f.id, f.error, f.message);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct KmeansResult {
    k: usize,
    iterations_run: usize,
    converged: bool,
    inertia: f64,
    mean_size: f64,
    groups: Vec<GroupSummary>,
}

pub fn kmeans(ctx: &mut Ctx, args: KmeansArgs) -> CliResult<()> {
    let b = &mut ctx.config.baseline;
    if args.k.is_some() {
        b.target_size = None;
    }
    if args.target_size.is_some() {
        b.k = None;
    }
    set_opt(&mut b.k, args.k);
    set_opt(&mut b.target_size, args.target_size);
    let b = b.clone();
    let seed = ctx.config.require_seed("baseline kmeans")?;
    let ds = ctx.dataset(&args.data.dataset)?;
    let k = match (b.k, b.target_size) {
        (Some(k), _) => k,
        (None, Some(n)) => kmeans_k_for_size(ds.len(), n)?,
        (None, None) => {
            return Err(CliError::validation(
                "cli::InvalidArgument",
                "give k or target_size (flag or [baseline] config)",
            ))
        }
    };
    let r = baselines::kmeans(&ds, k, seed)?;
    let groups = numbered(r.groups());
    let dir = ctx.out_dir()?;
    write_groups(&dir.join("kmeans_groups.csv"), &ds, &groups)?;
    let result = KmeansResult {
        k,
        iterations_run: r.iterations_run,
        converged: r.converged,
        inertia: r.inertia,
        mean_size: mean_size(&groups),
        groups: summarize(&ds, &groups),
    };
    ctx.report("baseline kmeans", "kmeans_report.json", &result)?;
    println!(
        "k-means with k = {k}: {} non-empty clusters, mean size {:.2}, {} iterations{}",
        groups.len(),
        result.mean_size,
        r.iterations_run,
        if r.converged { "" } else { " (not converged)" }
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct NnsResult {
    n: usize,
    groups: Vec<GroupSummary>,
}

/// One neighborhood per seed group, centred on its first member and named
/// after it.
pub fn nns(ctx: &mut Ctx, args: NnsArgs) -> CliResult<()> {
    let b = &mut ctx.config.baseline;
    if args.n.is_some() {
        b.target_size = None;
    }
    if args.target_size.is_some() {
        b.n = None;
    }
    set_opt(&mut b.n, args.n);
    set_opt(&mut b.target_size, args.target_size);
    let n = b.n.or(b.target_size).ok_or_else(|| {
        CliError::validation(
            "cli::InvalidArgument",
            "give n or target_size (flag or [baseline] config)",
        )
    })?;
    let ds = ctx.dataset(&args.data.dataset)?;
    let seeds = ctx.groups(&args.seeds, &ds, SeedProvenance::UserSupplied)?;
    let centers: Vec<usize> = seeds.iter().map(|s| s.group.members()[0]).collect();
    let groups: Vec<NamedGroup> = nns_groups(&ds, &centers, n)?
        .into_iter()
        .zip(&seeds)
        .map(|(group, s)| NamedGroup {
            id: s.id.clone(),
            group,
        })
        .collect();
    let dir = ctx.out_dir()?;
    write_groups(&dir.join("nns_groups.csv"), &ds, &groups)?;
    let result = NnsResult {
        n,
        groups: summarize(&ds, &groups),
    };
    ctx.report("baseline nns", "nns_report.json", &result)?;
    println!("{} nearest-neighbor groups of size {n}", groups.len());
    Ok(())
}

#[derive(Debug, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum MatchResult {
    Kmeans { target_size: usize, k: usize },
    Lfa { target_size: usize, tau: TauMatch },
}

pub fn match_size(ctx: &mut Ctx, args: MatchArgs) -> CliResult<()> {
    check(args.target_size > 0, "target size must be positive")?;
    let ds = ctx.dataset(&args.data.dataset)?;
    let result = match args.mode {
        ModeArg::Kmeans => MatchResult::Kmeans {
            target_size: args.target_size,
            k: kmeans_k_for_size(ds.len(), args.target_size)?,
        },
        ModeArg::Lfa => {
            let path = args
                .seeds
                .as_deref()
                .ok_or_else(|| CliError::validation("cli::InvalidArgument", "--mode lfa needs --seeds"))?;
            let seeds = ctx.groups(path, &ds, SeedProvenance::UserSupplied)?;
            let seeds: Vec<_> = seeds.into_iter().map(|s| s.group).collect();
            MatchResult::Lfa {
                target_size: args.target_size,
                tau: match_lfa_tau(&ds, &seeds, args.target_size)?,
            }
        }
    };
    ctx.report("match-size", "match_size.json", &result)?;
    match &result {
        MatchResult::Kmeans { target_size, k } => println!("k = {k} for mean cluster size {target_size}"),
        MatchResult::Lfa { target_size, tau } => println!(
            "tau = {} gives mean size {:.2} (target {target_size}, {} probes)",
            tau.tau,
            tau.mean_size,
            tau.probes.len()
        ),
    }
    Ok(())
}
