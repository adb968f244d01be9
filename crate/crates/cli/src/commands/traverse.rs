use lfa_core::traversal::traverse_group;
use lfa_core::SeedProvenance;
use serde::Serialize;

use super::{check, Ctx};
use crate::cli::TraverseArgs;
use crate::config::set;
use crate::error::{CliError, CliResult};
use crate::format::directions::read_direction;
use crate::format::embedding::write_dataset;

#[derive(Debug, Serialize)]
struct Cell {
    /// Id of the traversed embedding in the output dataset; absent on failure.
    image_id: Option<String>,
    target: String,
    strength: f64,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct TraverseResult {
    direction: String,
    strengths: Vec<f64>,
    written: usize,
    failed: usize,
    cells: Vec<Cell>,
}

/// Writes the traversed embeddings as a dataset directory (`embeddings.lfae`,
/// `ids.csv`) plus `traversal.json` mapping each row to its target and
/// strength.
pub fn traverse(ctx: &mut Ctx, args: TraverseArgs) -> CliResult<()> {
    set(&mut ctx.config.traverse.strengths, args.strengths);
    let strengths = ctx.config.traverse.strengths.clone();
    check(!strengths.is_empty(), "no strengths given")?;
    check(strengths.iter().all(|t| t.is_finite()), "strengths must be finite")?;

    let ds = ctx.dataset(&args.data.dataset)?;
    let (direction, files) = read_direction(&args.directions, &args.direction)?;
    ctx.record(files);

    let mut targets: Vec<usize> = Vec::new();
    for id in &args.targets {
        let i = ds.index_of(id).ok_or_else(|| {
            CliError::validation("cli::InvalidArgument", format!("--target {id:?} is not in the dataset"))
        })?;
        targets.push(i);
    }
    if let Some(path) = &args.target_groups {
        for g in ctx.groups(path, &ds, SeedProvenance::UserSupplied)? {
            targets.extend_from_slice(g.group.members());
        }
    }
    let mut seen = vec![false; ds.len()];
    targets.retain(|&i| !std::mem::replace(&mut seen[i], true));
    check(!targets.is_empty(), "no targets: pass --target or --target-groups")?;

    let cells = traverse_group(&ds, &targets, &direction, &strengths)?;
    let (mut ids, mut keys, mut data) = (Vec::new(), Vec::new(), Vec::new());
    let mut manifest = Vec::with_capacity(cells.len());
    for c in cells {
        let target = ds.image_id(c.target).to_string();
        match c.embedding {
            Ok(e) => {
                let out_id = format!("{target}@{}", c.strength);
                ids.push(out_id.clone());
                keys.push(ds.identity_key(ds.identity(c.target)).to_string());
                data.extend(e);
                manifest.push(Cell {
                    image_id: Some(out_id),
                    target,
                    strength: c.strength,
                    error: None,
                });
            }
            Err(e) => manifest.push(Cell {
                image_id: None,
                target,
                strength: c.strength,
                error: Some(e.code().to_string()),
            }),
        }
    }
    let dir = ctx.out_dir()?;
    if ids.is_empty() {
        return Err(CliError::runtime(
            "traversal::AllCellsFailed",
            "every traversal cell failed",
        ));
    }
    write_dataset(&dir, &ids, &keys, ds.dim(), &data)?;
    let result = TraverseResult {
        direction: args.direction.clone(),
        strengths,
        written: ids.len(),
        failed: manifest.len() - ids.len(),
        cells: manifest,
    };
    ctx.report("traverse", "traversal.json", &result)?;
    println!(
        "traversed {} targets along {}: {} embeddings written, {} cells failed",
        targets.len(),
        result.direction,
        result.written,
        result.failed
    );
    Ok(())
}
