//! Extended reals as an explicit tri-state.

use core::fmt;

/// A real value that may be `+∞` or may not have been computed at all.
///
/// Infinity is carried as its own variant rather than as `f64::INFINITY`
/// so that callers match on it instead of testing floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
    NotComputed,
}

impl Extended {
    /// Classifies a raw float: `+inf` maps to `Infinite`, NaN to `NotComputed`.
    pub fn from_f64(v: f64) -> Self {
        if v.is_nan() {
            Extended::NotComputed
        } else if v == f64::INFINITY {
            Extended::Infinite
        } else {
            Extended::Finite(v)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// Natural log; `Infinite` stays `Infinite`.
    pub fn ln(self) -> Extended {
        match self {
            Extended::Finite(v) => Extended::from_f64(libm::log(v)),
            other => other,
        }
    }

    pub fn exp(self) -> Extended {
        match self {
            Extended::Finite(v) => Extended::from_f64(libm::exp(v)),
            other => other,
        }
    }

    /// Value used when minimizing: anything non-finite ranks as `+inf`.
    pub fn objective(self) -> f64 {
        match self {
            Extended::Finite(v) if !v.is_nan() => v,
            _ => f64::INFINITY,
        }
    }

    pub fn map(self, op: impl FnOnce(f64) -> f64) -> Extended {
        match self {
            Extended::Finite(v) => Extended::from_f64(op(v)),
            other => other,
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        Extended::from_f64(v)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
            Extended::NotComputed => f.write_str("n/a"),
        }
    }
}
