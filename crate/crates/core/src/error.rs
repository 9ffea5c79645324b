use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The drive violates the zero-mean or `Φ(t - T/2) = -Φ(t)` constraint.
    #[error("drive constraint violated: {0}")]
    ConstraintViolated(String),

    /// Non-finite values while building a monodromy matrix (deep broken phase).
    #[error("overflow while propagating quasi-momentum q = {q}")]
    Overflow { q: f64 },

    /// Lattice amplitudes stopped being finite.
    #[error("amplitudes diverged at t = {t}")]
    Diverged { t: f64 },

    #[error("no unbroken phase at omega = {omega}: amplitude {delta0} is already broken")]
    NoUnbrokenPhase { omega: f64, delta0: f64 },

    #[error("search interval [{lo}, {hi}] does not bracket the onset")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("observable undefined for a state with zero norm")]
    ZeroNorm,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
