use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported field order {0}; supported orders are 2, 3, 4, 5, 7, 8")]
    UnsupportedField(u32),

    #[error("geometry with {points} points exceeds the ceiling of {ceiling}")]
    GeometryTooLarge { points: u64, ceiling: u64 },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("point {point} is out of range for a design on {v} points")]
    PointOutOfRange { point: usize, v: usize },

    #[error("exhaustive scan needs {subsets} subsets, above the ceiling of {ceiling}; use sample mode")]
    ExhaustiveOverCeiling { subsets: u128, ceiling: u128 },

    #[error("not in catalog: {0}")]
    NotInCatalog(String),

    #[error("no PBD(v,{{3,4,5}}) exists for v = {0}")]
    NoDesignExists(usize),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("unreachable parameter: {0}")]
    Unreachable(String),

    #[error("no filler design supplied for group size {0}")]
    MissingFiller(usize),

    #[error("filler for group size {size} is not a valid PBD: {reason}")]
    InvalidFiller { size: usize, reason: String },

    #[error("ingredient provider has no design of type {0}")]
    ProviderGap(String),

    #[error("design failed verification: {0}")]
    Verification(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("no idempotent latin square of order {0}")]
    NoIdempotentSquare(usize),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid design file: {0}")]
    Format(String),
}
