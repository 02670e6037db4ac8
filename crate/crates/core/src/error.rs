use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("covariance of component {component} is not positive definite")]
    NotPositiveDefinite { component: usize },

    #[error("covariance of component {component} is not symmetric")]
    NotSymmetric { component: usize },

    #[error("bad mixing weights: {0}")]
    BadWeights(String),

    #[error("invalid simplex point: {0}")]
    BadSimplexPoint(String),

    #[error("operation requires exactly two components, mixture has {0}")]
    NotTwoComponents(usize),

    #[error("operation requires exactly three components, mixture has {0}")]
    NotThreeComponents(usize),

    #[error("component indices ({i}, {j}) invalid for a mixture with {k} components")]
    BadPair { i: usize, j: usize, k: usize },

    #[error("components {i} and {j} have coincident means; the ridgeline is a single point")]
    CoincidentMeans { i: usize, j: usize },

    #[error("components {i} and {j} both have zero weight")]
    ZeroWeightPair { i: usize, j: usize },

    #[error("tangent frame is degenerate: all direction vectors vanish")]
    DegenerateFrame,

    #[error("point is not critical: scaled gradient norm {residual:e} exceeds {tolerance:e}")]
    NotCritical { residual: f64, tolerance: f64 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("grid oracle supports dimension <= 3, mixture has dimension {0}")]
    DimensionTooLarge(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate fit: covariance of component {component} is singular after regularization")]
    DegenerateFit { component: usize },

    #[error("too few rows: {rows} observations for {k} components in dimension {dim}")]
    TooFewRows { rows: usize, k: usize, dim: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the failure comes from the numerics rather than from the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotCritical { .. }
                | Error::InternalInconsistency(_)
                | Error::DegenerateFrame
                | Error::DegenerateFit { .. }
        )
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::BadWeights(_) => "BadWeights",
            Error::BadSimplexPoint(_) => "BadSimplexPoint",
            Error::NotTwoComponents(_) => "NotTwoComponents",
            Error::NotThreeComponents(_) => "NotThreeComponents",
            Error::BadPair { .. } => "BadPair",
            Error::CoincidentMeans { .. } => "CoincidentMeans",
            Error::ZeroWeightPair { .. } => "ZeroWeightPair",
            Error::DegenerateFrame => "DegenerateFrame",
            Error::NotCritical { .. } => "NotCritical",
            Error::InternalInconsistency(_) => "InternalInconsistency",
            Error::DimensionTooLarge(_) => "DimensionTooLarge",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse { .. } => "ParseError",
            Error::DegenerateFit { .. } => "DegenerateFit",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::Io { .. } => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }
}
