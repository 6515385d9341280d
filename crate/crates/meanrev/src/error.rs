use thiserror::Error;

/// Errors produced by basket estimation and backtesting.
#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a structural invariant (shape, finiteness, labels).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Requested lag cannot be estimated from the sample.
    #[error("lag {lag} too large for sample of length {t_len} (need lag <= T-3 = {max})")]
    LagTooLarge { lag: usize, t_len: usize, max: usize },

    /// Lag-0 covariance has an eigenvalue below the PSD clip threshold.
    #[error("covariance is not positive semidefinite: min eigenvalue {min_eig:.6e} below clip threshold {threshold:.6e}")]
    DegenerateCovariance { min_eig: f64, threshold: f64 },

    /// Quadratic form y'A0y is numerically zero for the given weights.
    #[error("degenerate basket variance: y'A0y = {0:.6e}")]
    DegenerateVariance(f64),

    /// AR(1) coefficient outside the open unit interval.
    #[error("AR(1) coefficient must satisfy |a| < 1, got {0}")]
    ArCoefficientOutOfRange(f64),

    /// Series shorter than an operation requires.
    #[error("series too short: {len} observations, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    /// Series has no sample variance to fit against.
    #[error("series has zero sample variance")]
    ZeroVariance,

    /// Variance floor exceeds the largest achievable basket variance.
    #[error("variance floor {floor:.6e} exceeds lambda_max(A0) = {lambda_max:.6e}")]
    InfeasibleVarianceFloor { floor: f64, lambda_max: f64 },

    /// Alternating projections failed to reach the constraint intersection.
    #[error("infeasible problem: projections stalled with residual {residual:.6e}")]
    Infeasible { residual: f64 },

    /// Requested support size outside 1..=n.
    #[error("support size k = {k} out of range 1..={n}")]
    SupportSizeOutOfRange { k: usize, n: usize },

    /// Fitted noise scale too small for contrarian position sizing.
    #[error("degenerate AR fit: noise sd {0:.6e} too small for position sizing")]
    DegenerateNoise(f64),

    /// Incompatible matrix/vector dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Asset group too small for pool search.
    #[error("asset group has {len} members, pool search needs at least 3")]
    GroupTooSmall { len: usize },

    /// Not enough data points for a fit.
    #[error("need at least {min} distinct points, got {got}")]
    TooFewPoints { got: usize, min: usize },

    /// CSV parse failure with location context.
    #[error("parse error at {location}: {reason}")]
    Parse { location: String, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
