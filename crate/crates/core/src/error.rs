use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("basis dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("occupation {occupation:#b} is not admitted by the basis filter")]
    FilteredOccupation { occupation: u64 },

    #[error("boson number {n} out of range (n_max = {n_max})")]
    BosonOutOfRange { n: usize, n_max: usize },

    #[error("{kind} mode index {index} out of range ({count} modes)")]
    ModeOutOfRange {
        kind: &'static str,
        index: usize,
        count: usize,
    },

    #[error("repeated fermionic index {0} in a creation or annihilation string")]
    RepeatedFermionIndex(usize),

    #[error("state vectors live on different bases")]
    BasisMismatch,

    #[error("amplitude vector length {got} does not match basis dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cannot normalize a zero vector")]
    ZeroNorm,

    #[error("term list is not Hermitian (residual norm {0:e})")]
    NotHermitian(f64),

    #[error("exponential series did not converge (last increment norm {last_increment:e})")]
    ExpNotConverged { last_increment: f64 },

    #[error("anti-Hermitian exponential drifted the norm by {drift:e}")]
    ExpNormDrift { drift: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("no sector change in bracket [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
