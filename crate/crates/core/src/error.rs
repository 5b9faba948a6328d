use thiserror::Error;

/// Errors raised by estimation, modelling and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("unknown status code {status} for subject {index}")]
    UnknownStatus { index: usize, status: u32 },

    #[error("unknown cause {cause}; sample has causes 1..={max_cause}")]
    UnknownCause { cause: u32, max_cause: u32 },

    #[error("horizon tau = {tau} lies outside the observed follow-up [0, {max_followup}]")]
    TauOutOfRange { tau: f64, max_followup: f64 },

    #[error(
        "leaving out subject {index} reduces follow-up to {max_followup}, below tau = {tau}"
    )]
    JackknifeSupport {
        index: usize,
        tau: f64,
        max_followup: f64,
    },

    #[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("too few observations: {n_obs} rows for {columns} regressors")]
    TooFewObservations { n_obs: usize, columns: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bootstrap gave up after {redraws} redraws of degenerate resamples (cap {cap})")]
    BootstrapExhausted { redraws: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
