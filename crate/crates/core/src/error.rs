use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative skew {relative_skew:e})")]
    NotHermitian { relative_skew: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e} (largest {max_eigenvalue:e})")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0} failed")]
    FactorizationFailed(&'static str),

    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),

    #[error("index out of range: {0}")]
    InvalidIndex(String),

    #[error("receive vector of user {user} stream {stream} is zero")]
    ZeroReceiveVector { user: usize, stream: usize },

    #[error("user {user} stream {stream} has no effective desired gain")]
    ZeroDesiredGain { user: usize, stream: usize },

    #[error("receive filter of user {user} has rank {rank} < {streams}")]
    RankDeficientFilter { user: usize, rank: usize, streams: usize },

    #[error("imbalance ratio undefined: first-stream SINR sum is zero")]
    ZeroDenominator,

    #[error("imbalance ratio needs at least two streams per user")]
    TooFewStreams,

    #[error("power bisection failed for user {user}: bracket [{lo:e}, {hi:e}], target {target:e}")]
    BisectionFailed {
        user: usize,
        lo: f64,
        hi: f64,
        target: f64,
    },

    #[error("rate targets are infeasible: power of user {user} exceeded {ceiling:e}")]
    InfeasibleTargets { user: usize, ceiling: f64 },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
