use thiserror::Error;

/// Failures reported by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A geometric or physical parameter violates its precondition.
    #[error("{name} must be {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    /// Coordinates outside the surface (not on the sphere / not a pair).
    #[error("invalid coordinates: {0}")]
    InvalidCoordinates(String),
    /// A massless operator was requested on a pathway that needs a gap.
    #[error("{0}")]
    ZeroMode(String),
    /// The requested accuracy could not be certified.
    #[error("tolerance {requested:e} not reached; best certified bound {achieved:e}")]
    ToleranceNotReached { requested: f64, achieved: f64 },
    /// A fit or extrapolation was given too few or degenerate nodes.
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("malformed surface specification `{0}`")]
    SurfaceSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Reject anything that is not strictly positive (NaN included).
pub(crate) fn require_positive<T: crate::Scalar>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            requirement: "positive",
            value: value.to_f64().unwrap_or(f64::NAN),
        })
    }
}

pub(crate) fn require_nonnegative<T: crate::Scalar>(name: &'static str, value: T) -> Result<()> {
    if value >= T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            requirement: "nonnegative",
            value: value.to_f64().unwrap_or(f64::NAN),
        })
    }
}
