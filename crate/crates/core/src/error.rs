//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix data has {len} values, expected {rows}x{cols} = {expected}")]
    DataLength {
        rows: usize,
        cols: usize,
        len: usize,
        expected: usize,
    },

    #[error("non-finite value at data index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix")]
    EigNonConvergence { dim: usize },

    #[error("matrix is not symmetric within tolerance (dim {dim})")]
    NotSymmetric { dim: usize },

    #[error("matrix is not positive semidefinite: eigenvalue {value} is below -{limit}")]
    NotPositiveSemidefinite { value: f64, limit: f64 },

    #[error("invalid tolerance settings: {0}")]
    InvalidTolerance(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("unknown block id `{0}`")]
    UnknownBlock(String),

    #[error("duplicate block id `{0}`")]
    DuplicateId(String),

    #[error("invalid block id `{0}`: ids must be non-empty and printable without whitespace, commas, semicolons or quotes")]
    InvalidId(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("plan does not match collection: {0}")]
    PlanMismatch(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
