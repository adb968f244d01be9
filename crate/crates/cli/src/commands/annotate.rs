use lfa_core::annotation::{consensus_table, AttributeStats};
use lfa_core::metrics::AttributeSchema;
use serde::Serialize;

use super::Ctx;
use crate::cli::ConsensusArgs;
use crate::error::{CliError, CliResult};
use crate::format::attributes::{read_annotator_json, read_schema_json, write_consensus_csv};

#[derive(Debug, Serialize)]
struct ConsensusResult {
    annotators: usize,
    images: usize,
    /// Agreement is the winning vote count over all annotators.
    agreement_denominator: &'static str,
    schema: AttributeSchema,
    stats: Vec<AttributeStats>,
}

/// Writes `consensus.csv` and `consensus_stats.json`.
pub fn consensus(ctx: &mut Ctx, args: ConsensusArgs) -> CliResult<()> {
    let schema = match &args.schema {
        Some(path) => {
            let s = read_schema_json(path)?;
            let bytes = std::fs::read(path).map_err(|e| CliError::read(path, e))?;
            ctx.record(vec![(path.clone(), bytes)]);
            s
        }
        None => AttributeSchema::face_attributes(),
    };
    let mut tables = Vec::with_capacity(args.annotators.len());
    for path in &args.annotators {
        tables.push(read_annotator_json(path, &schema)?);
        let bytes = std::fs::read(path).map_err(|e| CliError::read(path, e))?;
        ctx.record(vec![(path.clone(), bytes)]);
    }
    let table = consensus_table(&tables, args.intersect)?;

    let dir = ctx.out_dir()?;
    write_consensus_csv(&dir.join("consensus.csv"), &table)?;
    let result = ConsensusResult {
        annotators: table.annotator_count,
        images: table.image_ids.len(),
        agreement_denominator: "all-annotators",
        schema: table.schema.clone(),
        stats: table.stats.clone(),
    };
    ctx.report("consensus", "consensus_stats.json", &result)?;

    println!("{} images, {} annotators", result.images, result.annotators);
    for s in &result.stats {
        let classes: Vec<String> = s
            .classes
            .iter()
            .filter(|c| c.count > 0)
            .map(|c| {
                format!(
                    "{} {:.1}% ({:.2}±{:.2})",
                    c.class, c.percentage, c.mean_agreement, c.std_agreement
                )
            })
            .collect();
        println!(
            "  {:<12} {} | unknown {}",
            s.attribute,
            classes.join(", "),
            s.unknown_count
        );
    }
    Ok(())
}
