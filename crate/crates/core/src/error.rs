use crate::grid::Support;

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum SlepianError {
    #[error("window length p = {p} is not on the grid: p*m = {pm} is not an integer (m = {m})")]
    OffGridLag { m: usize, p: f64, pm: f64 },

    #[error("window length p = {p} must lie in [0.5, 1)")]
    LagOutOfRange { p: f64 },

    #[error("grid needs at least 2 cells, got m = {m}")]
    TooFewCells { m: usize },

    #[error("{what}: expected {expected} values, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("expected support {expected}, got {got}")]
    SupportMismatch { expected: Support, got: Support },

    #[error("interval [{a}, {b}] is not node-aligned or not inside the support")]
    BadInterval { a: f64, b: f64 },

    #[error("covariance arguments must satisfy p <= s <= t <= 1; got s = {s}, t = {t}, p = {p}")]
    BadCovArgs { s: f64, t: f64, p: f64 },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("KKT system is singular")]
    SingularKkt,

    #[error("time scaling requires b in (1, 2], got b = {b}")]
    BadTimeScale { b: f64 },

    #[error("estimator needs at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },

    #[error("level alpha = {alpha} must lie in (0, 1)")]
    BadLevel { alpha: f64 },

    #[error("crossing level u = {u} must be finite")]
    BadCrossingLevel { u: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, SlepianError>;
