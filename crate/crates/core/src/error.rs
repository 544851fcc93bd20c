//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by constructors, oracles, and the simulation engine.
///
/// Divergence of a trajectory is *not* an error: the engine records it as a
/// categorical outcome. Likewise an infinite moment is reported as
/// [`crate::noise::Moment::Unavailable`], not through this type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A vector or matrix had the wrong dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The matrix has an eigenvalue with real part above the rejection
    /// threshold of -1e-9.
    #[error("matrix is not Hurwitz: max eigenvalue real part {max_real_part:.6e}")]
    NotHurwitz { max_real_part: f64 },

    /// A linear solve hit a (numerically) singular matrix.
    #[error("singular matrix in {context}")]
    SingularMatrix { context: &'static str },

    /// Drift certification needs a known fixed point (or solution set).
    #[error("operator has no fixed point or solution set to measure distances against")]
    MissingFixedPoint,

    /// The sampling annulus must exclude a positive radius around the fixed
    /// point; the drift ratio is 0/0 there.
    #[error("degenerate sampling region: r_min = {r_min} must be > 0 and < r_max = {r_max}")]
    DegenerateRegion { r_min: f64, r_max: f64 },

    /// The vector-power inequality divides by the base norm; a zero base is
    /// outside its domain.
    #[error("zero base vector: the norm-power bound divides by ||v||")]
    ZeroBase,

    /// Exact conditional expectations need finite-support noise.
    #[error("unsupported noise model: {op} requires finite-support noise")]
    UnsupportedNoise { op: &'static str },

    /// Parameter validation failure, with a human-readable reason.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
