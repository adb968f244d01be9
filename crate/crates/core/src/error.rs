use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library. Each variant maps to a module-qualified
/// code via [`Error::code`] so front ends can report them uniformly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is too small to normalize")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("group has no members")]
    EmptyGroup,

    #[error("latent direction is degenerate (norm {norm:e})")]
    DegenerateDirection { norm: f64 },

    #[error("threshold {0} must lie in the open interval (0, 1)")]
    InvalidThreshold(f64),

    #[error("k = {k} must satisfy 1 <= k <= {n}")]
    InvalidK { k: usize, n: usize },

    #[error("group size n = {n} must satisfy 1 <= n <= {len}")]
    InvalidN { n: usize, len: usize },

    #[error(
        "no threshold reaches a mean group size within 10% of {target}; \
         closest was tau = {best_tau} with mean size {best_mean}"
    )]
    Unachievable {
        target: usize,
        best_tau: f64,
        best_mean: f64,
    },

    #[error("attribute schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("annotator image sets differ: {0}")]
    ImageSetMismatch(String),

    #[error("unknown class token {token:?} for attribute {attribute:?}")]
    UnknownClassToken { attribute: String, token: String },

    #[error("group needs at least 2 members with attribute rows, found {0}")]
    TooFewMembers(usize),

    #[error("no group is eligible for coherence scoring")]
    NoEligibleGroups,

    #[error("score set has no genuine pairs")]
    NoGenuinePairs,

    #[error("score set has no impostor pairs")]
    NoImpostorPairs,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("antipodal inputs: great circle is undefined")]
    AntipodalInputs,

    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Module-qualified error code, e.g. `lfa::DegenerateDirection`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroVector { .. } => "core::ZeroVector",
            Error::DimensionMismatch { .. } => "core::DimensionMismatch",
            Error::InvalidDataset(_) => "core::InvalidDataset",
            Error::IndexOutOfRange { .. } => "core::IndexOutOfRange",
            Error::EmptyGroup => "lfa::EmptyGroup",
            Error::DegenerateDirection { .. } => "lfa::DegenerateDirection",
            Error::InvalidThreshold(_) => "lfa::InvalidThreshold",
            Error::InvalidK { .. } => "baselines::InvalidK",
            Error::InvalidN { .. } => "baselines::InvalidN",
            Error::Unachievable { .. } => "baselines::Unachievable",
            Error::SchemaMismatch(_) => "metrics::SchemaMismatch",
            Error::ImageSetMismatch(_) => "annotation::ImageSetMismatch",
            Error::UnknownClassToken { .. } => "annotation::UnknownClassToken",
            Error::TooFewMembers(_) => "metrics::TooFewMembers",
            Error::NoEligibleGroups => "metrics::NoEligibleGroups",
            Error::NoGenuinePairs => "metrics::NoGenuinePairs",
            Error::NoImpostorPairs => "metrics::NoImpostorPairs",
            Error::InvalidArgument(_) => "core::InvalidArgument",
            Error::AntipodalInputs => "traversal::AntipodalInputs",
            Error::InvalidConfig(_) => "synth::InvalidConfig",
        }
    }

    /// True for errors caused by bad input or parameters rather than by
    /// the data defeating a computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidDataset(_)
                | Error::IndexOutOfRange { .. }
                | Error::InvalidThreshold(_)
                | Error::InvalidK { .. }
                | Error::InvalidN { .. }
                | Error::SchemaMismatch(_)
                | Error::ImageSetMismatch(_)
                | Error::UnknownClassToken { .. }
                | Error::InvalidArgument(_)
                | Error::InvalidConfig(_)
        )
    }
}
