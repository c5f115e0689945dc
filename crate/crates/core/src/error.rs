use thiserror::Error;

use crate::filter::FeasibilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// No receive filter removes the delay-induced bias for this pulse and
    /// maximum delay.
    #[error(
        "infeasible unbiased design: N_s={}, d={}, rank={}, residual={:.3e}",
        .0.n_s, .0.d, .0.rank, .0.residual
    )]
    Infeasible(Box<FeasibilityReport>),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
