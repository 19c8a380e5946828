//! Error types shared across the crate.
//!
//! Every error carries a stable machine-readable code (see [`Error::code`])
//! so front ends can report failures without string matching on messages.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Which nuisance model a fit failure originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelRole {
    Propensity,
    OutcomeControl,
    OutcomeTreated,
}

impl std::fmt::Display for ModelRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelRole::Propensity => write!(f, "propensity"),
            ModelRole::OutcomeControl => write!(f, "control-arm outcome"),
            ModelRole::OutcomeTreated => write!(f, "treated-arm outcome"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{name}` not found in input")]
    MissingColumn { name: String },

    #[error("treatment value at data row {row} is not 0 or 1")]
    NonBinaryTreatment { row: usize },

    #[error("non-finite value in column `{column}` at data row {row}")]
    NonFiniteValue { column: String, row: usize },

    #[error("unparseable value in column `{column}` at data row {row}")]
    ParseValue { column: String, row: usize },

    #[error("outcome value at data row {row} is not 0 or 1, required by the logistic outcome family")]
    NonBinaryOutcome { row: usize },

    #[error("dataset must contain at least one treated and one control unit")]
    EmptyArm,

    #[error("column `{column}` has zero variance")]
    ZeroVariance { column: String },

    #[error("binary response takes a single value; no finite fit exists")]
    OneClass,

    #[error("perfect separation detected; the logistic likelihood has no finite maximizer")]
    Separation,

    #[error("design matrix is singular or numerically rank deficient")]
    SingularDesign,

    #[error("solver did not converge within {max_iter} iterations")]
    MaxIterExceeded { max_iter: usize },

    #[error("fitting the {model} model failed: {source}")]
    FitFailed {
        model: ModelRole,
        #[source]
        source: Box<Error>,
    },

    #[error("fitted propensity score at unit {unit} is exactly 0 or 1")]
    DegeneratePropensity { unit: usize },

    #[error("k = {k} exceeds the limit {limit} for this dataset")]
    KTooLarge { k: usize, limit: usize },

    #[error("opposite treatment arm is empty; nothing to match against")]
    EmptyOppositeArm,

    #[error("dataset is too small to split into two fittable halves (n = {n})")]
    SplitTooSmall { n: usize },

    #[error("{failed} of {requested} bootstrap replicates failed")]
    TooManyFailures { failed: usize, requested: usize },

    #[error("standardized-difference denominator is zero")]
    ZeroDenominator,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(String),
}

impl Error {
    /// Stable machine-readable code for this error. The set of codes is
    /// closed; front ends may rely on it.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MissingColumn { .. } => "missing_column",
            Error::NonBinaryTreatment { .. } => "non_binary_treatment",
            Error::NonFiniteValue { .. } => "non_finite_value",
            Error::ParseValue { .. } => "parse_value",
            Error::NonBinaryOutcome { .. } => "non_binary_outcome",
            Error::EmptyArm => "empty_arm",
            Error::ZeroVariance { .. } => "zero_variance",
            Error::OneClass => "one_class",
            Error::Separation => "separation",
            Error::SingularDesign => "singular_design",
            Error::MaxIterExceeded { .. } => "max_iter_exceeded",
            Error::FitFailed { source, .. } => source.code(),
            Error::DegeneratePropensity { .. } => "degenerate_propensity",
            Error::KTooLarge { .. } => "k_too_large",
            Error::EmptyOppositeArm => "empty_opposite_arm",
            Error::SplitTooSmall { .. } => "split_too_small",
            Error::TooManyFailures { .. } => "too_many_failures",
            Error::ZeroDenominator => "zero_denominator",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn in_model(self, model: ModelRole) -> Error {
        Error::FitFailed {
            model,
            source: Box::new(self),
        }
    }
}
