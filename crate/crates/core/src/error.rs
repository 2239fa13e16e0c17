use thiserror::Error;

/// Errors raised while validating data, fitting, or estimating.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("binary column {col} must contain both 0 and 1 (found {ones} ones in {n} rows)")]
    DegenerateBinary { col: usize, ones: usize, n: usize },

    #[error("binary column {col} has non 0/1 value {value} at row {row}")]
    NotBinary { col: usize, row: usize, value: f64 },

    #[error("design matrix is rank deficient (rank {rank} < {cols} columns)")]
    Collinear { rank: usize, cols: usize },

    #[error("operation requires a binary predictor column")]
    MissingBinaryColumn,

    #[error("observation {row} has leverage {leverage}, HC2/HC3 weights undefined")]
    LeverageOne { row: usize, leverage: f64 },

    #[error("group sizes must satisfy 0 < m < n (m = {m}, n = {n})")]
    BadGroupSizes { m: usize, n: usize },

    #[error("mu must lie strictly inside (0, 1), got {0}")]
    BadMu(f64),

    #[error("division by zero: {0}")]
    DivideByZero(&'static str),

    #[error("sample has zero spread: {0}")]
    DegenerateSample(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the estimation step itself rather than of the
    /// input data's shape or contents.
    pub fn is_estimation_error(&self) -> bool {
        match self {
            Error::Collinear { .. }
            | Error::LeverageOne { .. }
            | Error::DegenerateSample(_)
            | Error::DivideByZero(_) => true,
            Error::Replicate { source, .. } => source.is_estimation_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
