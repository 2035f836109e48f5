//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by the fractional operators, the solver, the game
/// selectors and the aiming procedure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    /// A fractional order must lie strictly inside (0, 1).
    #[error("fractional order must satisfy 0 < alpha < 1, got {0}")]
    InvalidOrder(f64),

    /// The gamma function is only evaluated for positive arguments.
    #[error("gamma argument must be positive and finite, got {0}")]
    GammaDomain(f64),

    /// Mittag-Leffler argument outside the supported envelope.
    #[error(
        "mittag-leffler arguments outside the working envelope \
         (alpha = 1 or 0.3 <= alpha < 1, |z| <= 80): alpha = {alpha}, z = {z}"
    )]
    MittagLefflerEnvelope { alpha: f64, z: f64 },

    /// The Mittag-Leffler series exceeds the f64 range; the caller must
    /// rescale the problem.
    #[error(
        "mittag-leffler series overflows f64 for alpha = {alpha}, z = {z}; rescale the problem"
    )]
    MittagLefflerOverflow { alpha: f64, z: f64 },

    /// Cancellation in the alternating series eats the 1e-9 accuracy budget;
    /// the caller must rescale the problem.
    #[error(
        "mittag-leffler series for alpha = {alpha}, z = {z} cannot be summed to 1e-9 \
         relative accuracy in f64 (estimated error {estimate:.2e}); rescale the problem"
    )]
    MittagLefflerPrecision { alpha: f64, z: f64, estimate: f64 },

    /// Malformed time grid (ordering, horizon, node count).
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// Vector or grid lengths do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The operation is only defined on uniform grids.
    #[error("operation requires a uniform time grid")]
    NonUniformGrid,

    /// A NaN or infinity appeared while stepping a trajectory.
    #[error("non-finite value produced at node {node} (t = {t})")]
    NonFinite { node: usize, t: f64 },

    /// A scalar parameter violates its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The selector or saddle check does not support this action-set /
    /// dynamics combination; refusing instead of approximating.
    #[error("unsupported action-set/dynamics combination: {0}")]
    UnsupportedCombination(String),

    /// Inequality checks require trajectories anchored at the origin.
    #[error(
        "trajectory must start at the origin (|x(0)| = {norm:.3e} exceeds 1e-12); \
         shift it by its initial value first"
    )]
    NonzeroInitialValue { norm: f64 },

    /// A candidate Lyapunov function failed its construction checks.
    #[error("lyapunov function rejected: {0}")]
    InvalidLyapunov(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, FracError>;
