//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A quantile was requested over an empty residual set.
    #[error("empty residual set")]
    EmptyResiduals,

    /// A probability-like parameter left (0, 1) or [0, 1].
    #[error("parameter {name} = {value} outside {range}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A vector had the wrong length for the object it was paired with.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Matrix or label data contained NaN/inf where finite values are required.
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    /// Labels and feature rows disagree in count.
    #[error("label count {labels} does not match feature row count {rows}")]
    LabelCount { rows: usize, labels: usize },

    /// Split index outside the valid range.
    #[error("split index n0 = {n0} invalid for n = {n} (need 1 < n0 <= n)")]
    InvalidSplit { n0: usize, n: usize },

    /// A z-score detector cannot standardize a constant column.
    #[error("zero-variance column {col} cannot be standardized")]
    ZeroVarianceColumn { col: usize },

    /// A robust detector cannot standardize a column whose MAD vanishes.
    #[error("column {col} has zero median absolute deviation")]
    ZeroMadColumn { col: usize },

    /// Too few rows to fit the requested component.
    #[error("{what} needs at least {need} rows, got {got}")]
    TooFewRows {
        what: &'static str,
        need: usize,
        got: usize,
    },

    /// Oracle interval constructors need the true outlier mask.
    #[error("baseline/oracle interval requires the true outlier mask (simulation or injected-outlier mode)")]
    MissingOracleMask,

    /// The context's score kind does not match the requested constructor mode.
    #[error("score kind mismatch: context is fitted for {fitted}, requested {requested}")]
    ScoreKindMismatch {
        fitted: &'static str,
        requested: &'static str,
    },

    /// Importance weights must be finite.
    #[error("non-finite importance weight")]
    NonFiniteWeight,

    /// A numerical construction has no well-defined solution for the
    /// given inputs (e.g. a non-positive-definite solve).
    #[error("degenerate construction: inputs admit no well-defined solution")]
    DegenerateConstruction,

    /// Configuration file problems (unknown key, bad value, missing key).
    #[error("config: {0}")]
    Config(String),

    /// CSV/data ingestion problems, with 1-based location when known.
    #[error("data: {0}")]
    Data(String),

    /// Filesystem problems while reading inputs or writing reports.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Build a config error.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Build a data error.
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Process exit code per the CLI contract: 1 for configuration
    /// errors, 2 for data errors (everything reachable from bad inputs).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParam { .. } | Error::MissingOracleMask => 1,
            _ => 2,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
