use thiserror::Error;

/// Errors raised by configuration handling, operator construction, scalar
/// arithmetic and the numerical propagators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range 1..={sites}")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("particle number {particles} out of range 0..={sites}")]
    ParticlesOutOfRange { particles: usize, sites: usize },

    #[error("lattice size {0} is not supported here")]
    LatticeSize(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not representable in exact mode")]
    NotRepresentable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Krylov propagator did not converge: {0}")]
    KrylovNonConvergence(String),

    #[error("rank-deficient shock family: numerical rank {rank} of {columns} columns")]
    RankDeficient { rank: usize, columns: usize },

    #[error("normalization is zero")]
    ZeroNormalization,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
