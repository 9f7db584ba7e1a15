use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    /// A pivot of the LU factorization fell below the relative threshold.
    #[error("matrix of dimension {dimension} is numerically singular")]
    Singular { dimension: usize },

    #[error("{rows}x{cols} matrix does not have full column rank")]
    RankDeficient { rows: usize, cols: usize },

    #[error("insufficient pilots: need at least {required} slots, got {available}")]
    InsufficientPilots { required: usize, available: usize },

    #[error("pilot Gram matrix (dimension {dimension}) is singular")]
    SingularPilotGram { dimension: usize },

    #[error("observation Gram matrix (dimension {dimension}) is singular")]
    SingularObservationGram { dimension: usize },

    #[error("channel column {column} is zero")]
    DegenerateChannel { column: usize },

    #[error("search of {evaluations} candidates exceeds the cap of {cap}")]
    ComplexityCap { evaluations: u128, cap: u128 },

    #[error("exact enumeration limited to M <= {max_antennas}, K <= {max_users} and 4^K * 4^M <= 1e8 (got M = {antennas}, K = {users})")]
    OracleCap {
        antennas: usize,
        users: usize,
        max_antennas: usize,
        max_users: usize,
    },

    #[error("discretization grid does not cover {0}")]
    GridCoverage(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("at SNR {snr_db} dB: {source}")]
    AtSnr {
        snr_db: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at_snr(self, snr_db: f64) -> Self {
        Error::AtSnr {
            snr_db,
            source: Box::new(self),
        }
    }
}
