use core::fmt;

/// Errors returned by the numerical routines.
///
/// Soft numerical outcomes (a bound that diverged, an MGF that is infinite)
/// are values, not errors; see [`crate::Extended`] and
/// [`crate::BoundStatus`].
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    InvalidInput(&'static str),
    /// A distribution or shift-function parameter is out of range.
    InvalidParameter { what: &'static str, value: f64 },
    /// Adaptive quadrature exhausted its budget above the error target.
    NonConvergent { value: f64, error_estimate: f64 },
    /// An integral over an unbounded range does not converge.
    Diverged,
    /// `Pr[Z > 0]` is too small to condition on.
    ZeroMass { mass: f64 },
    /// The shift function vanishes at `x + z`.
    DenominatorZero { at: f64 },
    /// A shift function has no analytic derivative at the requested point.
    MissingDerivativeOracle { order: usize, at: f64 },
    /// Cauchy ratio inputs must be strictly positive.
    NonPositiveEntry { index: usize },
    /// Paired sequences differ in length.
    LengthMismatch { left: usize, right: usize },
    /// The objective was infinite on the entire seed grid.
    NoFiniteValue,
    /// A shift function failed the strict absolute monotonicity probe.
    NotStrictlyAbsolutelyMonotonic { order: usize, at: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InvalidParameter { what, value } => {
                write!(f, "parameter {what} out of range: {value}")
            }
            Error::NonConvergent { value, error_estimate } => {
                write!(f, "quadrature did not converge (value {value}, error estimate {error_estimate})")
            }
            Error::Diverged => write!(f, "integral diverges"),
            Error::ZeroMass { mass } => write!(f, "positive part has negligible mass {mass}"),
            Error::DenominatorZero { at } => write!(f, "shift function vanishes at {at}"),
            Error::MissingDerivativeOracle { order, at } => {
                write!(f, "no derivative of order {order} available at {at}")
            }
            Error::NonPositiveEntry { index } => write!(f, "entry {index} is not positive"),
            Error::LengthMismatch { left, right } => {
                write!(f, "sequence lengths differ: {left} vs {right}")
            }
            Error::NoFiniteValue => write!(f, "objective is infinite on the whole seed grid"),
            Error::NotStrictlyAbsolutelyMonotonic { order, at } => {
                write!(f, "derivative of order {order} is not strictly positive at {at}")
            }
        }
    }
}

impl core::error::Error for Error {}
