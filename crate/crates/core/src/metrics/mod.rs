//! Evaluation of discovered groups: attribute-based semantic coherence and
//! verification-error bias metrics over within-group score distributions.

mod attributes;
mod bootstrap;
mod coherence;
mod report;
mod scores;

pub use attributes::{attribute_distance, AttributeRow, AttributeSchema, AttributeSpec, AttributeTable, UNKNOWN};
pub use bootstrap::{bootstrap_fmr_ci, BootstrapCi, CiMethod, Z_95};
pub use coherence::{group_coherence, method_coherence, pair_distance_totals, MethodCoherence};
pub use report::{
    bias_report, population_std, random_group, BiasConfig, BiasReport, GroupBias, GroupRole, LabeledGroup,
    SpreadSummary, TargetRate, DEFAULT_BOOTSTRAP_ITERATIONS, DEFAULT_FIXED_THRESHOLD, DEFAULT_FMR_TARGETS,
};
pub use scores::{
    collect_scores, eer, eer_point, fmr_at, fmr_curve, fnmr_at, fnmr_at_fmr, fnmr_at_fmr_point, impostor_mean,
    threshold_grid, OperatingPoint, ScoreSet,
};
