//! Shift functions `f` for the operational bound `E[f(z + Z)] / f(x + z)`.
//!
//! Each catalog entry carries an analytic derivative oracle. Step-like
//! entries follow the convention `u(0) = 1/2`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::special::falling_factorial;
use crate::Error;

/// Probe count for the monotonicity check.
pub const MONOTONE_PROBES: usize = 1024;
/// Relative tolerance of the finite-difference derivative check.
pub const DERIVATIVE_CHECK_RTOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Exponential(f64),
    Step,
    TruncatedPower(f64),
    TruncatedExponential(f64),
    Logistic(f64),
    Polynomial(Vec<f64>),
    PositivePart(Box<ShiftFunction>),
}

/// A nonnegative, non-decreasing function with derivative oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftFunction {
    kind: Kind,
}

fn heaviside(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else if w == 0.0 {
        0.5
    } else {
        0.0
    }
}

fn nonnegative(what: &'static str, value: f64) -> Result<f64, Error> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { what, value })
    }
}

impl ShiftFunction {
    /// `e^{a w}`; `a = 0` is the constant 1.
    pub fn exponential(alpha: f64) -> Result<Self, Error> {
        Ok(ShiftFunction { kind: Kind::Exponential(nonnegative("alpha", alpha)?) })
    }

    /// Heaviside step `u(w)`.
    pub fn step() -> Self {
        ShiftFunction { kind: Kind::Step }
    }

    /// `w^a u(w)`.
    pub fn truncated_power(alpha: f64) -> Result<Self, Error> {
        Ok(ShiftFunction { kind: Kind::TruncatedPower(nonnegative("alpha", alpha)?) })
    }

    /// `e^{a w} u(w)`.
    pub fn truncated_exponential(alpha: f64) -> Result<Self, Error> {
        Ok(ShiftFunction { kind: Kind::TruncatedExponential(nonnegative("alpha", alpha)?) })
    }

    /// `1 / (1 + e^{-w/a})`, a smooth step of width `a`.
    pub fn logistic(alpha: f64) -> Result<Self, Error> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter { what: "alpha", value: alpha });
        }
        Ok(ShiftFunction { kind: Kind::Logistic(alpha) })
    }

    /// `sum_k c_k w^k`, lowest order first. Not checked for sign or
    /// monotonicity; used to compare series against quadrature.
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self, Error> {
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("polynomial needs at least one coefficient"));
        }
        if let Some(&bad) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter { what: "coefficient", value: bad });
        }
        Ok(ShiftFunction { kind: Kind::Polynomial(coefficients) })
    }

    /// `f(w) u(w)`.
    pub fn positive_part(&self) -> Self {
        match self.kind {
            Kind::PositivePart(_) | Kind::Step | Kind::TruncatedPower(_) | Kind::TruncatedExponential(_) => {
                self.clone()
            }
            _ => ShiftFunction { kind: Kind::PositivePart(Box::new(self.clone())) },
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Exponential(a) => format!("exp:{a}"),
            Kind::Step => String::from("step"),
            Kind::TruncatedPower(a) => format!("power:{a}"),
            Kind::TruncatedExponential(a) => format!("trunc-exp:{a}"),
            Kind::Logistic(a) => format!("logistic:{a}"),
            Kind::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| format!("{v}")).collect();
                format!("poly:{}", parts.join(","))
            }
            Kind::PositivePart(inner) => format!("pos({})", inner.name()),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Exponential(a) | Kind::TruncatedPower(a) | Kind::TruncatedExponential(a) | Kind::Logistic(a) => {
                vec![*a]
            }
            Kind::Step => Vec::new(),
            Kind::Polynomial(c) => c.clone(),
            Kind::PositivePart(inner) => inner.params(),
        }
    }

    pub fn eval(&self, w: f64) -> f64 {
        match &self.kind {
            Kind::Exponential(a) => {
                if *a == 0.0 {
                    1.0
                } else {
                    libm::exp(a * w)
                }
            }
            Kind::Step => heaviside(w),
            Kind::TruncatedPower(a) => {
                if w > 0.0 {
                    if *a == 0.0 {
                        1.0
                    } else {
                        libm::pow(w, *a)
                    }
                } else if w == 0.0 && *a == 0.0 {
                    0.5
                } else {
                    0.0
                }
            }
            Kind::TruncatedExponential(a) => {
                let u = heaviside(w);
                if u == 0.0 {
                    0.0
                } else {
                    u * libm::exp(a * w)
                }
            }
            Kind::Logistic(a) => 1.0 / (1.0 + libm::exp(-w / a)),
            Kind::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * w + ck),
            Kind::PositivePart(inner) => {
                let u = heaviside(w);
                if u == 0.0 {
                    0.0
                } else {
                    u * inner.eval(w)
                }
            }
        }
    }

    /// `f^{(n)}(w)`, or `None` where the function has no classical
    /// derivative of that order (the jump of a step-like entry).
    pub fn derivative(&self, n: usize, w: f64) -> Option<f64> {
        if n == 0 {
            return Some(self.eval(w));
        }
        match &self.kind {
            Kind::Exponential(a) => Some(libm::pow(*a, n as f64) * self.eval(w)),
            Kind::Step => (w != 0.0).then_some(0.0),
            Kind::TruncatedPower(a) => {
                if w < 0.0 {
                    Some(0.0)
                } else if w == 0.0 {
                    None
                } else {
                    let ff = falling_factorial(*a, n);
                    Some(if ff == 0.0 { 0.0 } else { ff * libm::pow(w, a - n as f64) })
                }
            }
            Kind::TruncatedExponential(a) => {
                if w < 0.0 {
                    Some(0.0)
                } else if w == 0.0 {
                    None
                } else {
                    Some(libm::pow(*a, n as f64) * libm::exp(a * w))
                }
            }
            Kind::Logistic(a) => Some(logistic_derivative(*a, n, w)),
            Kind::Polynomial(c) => {
                let mut acc = 0.0;
                for k in (n..c.len()).rev() {
                    acc = acc * w + c[k] * falling_factorial(k as f64, n);
                }
                Some(acc)
            }
            Kind::PositivePart(inner) => {
                if w < 0.0 {
                    Some(0.0)
                } else if w == 0.0 {
                    None
                } else {
                    inner.derivative(n, w)
                }
            }
        }
    }

    /// `c` such that `f(w) = 0` for all `w < c`.
    pub fn support_cutoff(&self) -> Option<f64> {
        match self.kind {
            Kind::Step | Kind::TruncatedPower(_) | Kind::TruncatedExponential(_) | Kind::PositivePart(_) => Some(0.0),
            _ => None,
        }
    }

    /// Point at which `f` or one of its derivatives jumps.
    pub fn breakpoint(&self) -> Option<f64> {
        self.support_cutoff()
    }

    /// Catalog claim of strict absolute monotonicity on the whole line.
    pub fn sam_claimed(&self) -> bool {
        matches!(self.kind, Kind::Exponential(a) if a > 0.0)
    }

    /// Rough exponential or polynomial growth rate, used to size tail
    /// truncations.
    pub fn growth_hint(&self) -> f64 {
        match &self.kind {
            Kind::Exponential(a) | Kind::TruncatedExponential(a) | Kind::TruncatedPower(a) => *a,
            Kind::Step | Kind::Logistic(_) => 0.0,
            Kind::Polynomial(c) => (c.len() - 1) as f64,
            Kind::PositivePart(inner) => inner.growth_hint(),
        }
    }

    /// Degree when the function is a polynomial on the whole line.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match &self.kind {
            Kind::Polynomial(c) => Some(c.len() - 1),
            Kind::Exponential(a) if *a == 0.0 => Some(0),
            _ => None,
        }
    }

    /// Typical length over which `f` changes.
    fn length_scale(&self) -> f64 {
        match &self.kind {
            Kind::Logistic(a) => *a,
            Kind::Exponential(a) | Kind::TruncatedExponential(a) if *a > 1.0 => 1.0 / a,
            Kind::PositivePart(inner) => inner.length_scale(),
            _ => 1.0,
        }
    }

    /// Checks `f >= 0` and non-decreasing on [`MONOTONE_PROBES`] evenly
    /// spaced points of `[lo, hi]`.
    pub fn is_nondecreasing_on(&self, lo: f64, hi: f64) -> bool {
        let n = MONOTONE_PROBES;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..n {
            let w = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let v = self.eval(w);
            if !(v >= 0.0) || v < prev {
                return false;
            }
            prev = v;
        }
        true
    }

    /// Monotonicity over the default working range `[-20, 20]`.
    pub fn nondecreasing(&self) -> bool {
        self.is_nondecreasing_on(-20.0, 20.0)
    }

    /// Compares the first-derivative oracle against a central difference at
    /// each probe point; points within a few steps of the support cutoff
    /// are skipped. Returns the first failing point.
    pub fn check_first_derivative(&self, points: &[f64]) -> Result<(), f64> {
        for &w in points {
            let h = 1e-5 * self.length_scale().max(w.abs().min(1.0) * self.length_scale());
            if let Some(c) = self.breakpoint() {
                if (w - c).abs() < 10.0 * h {
                    continue;
                }
            }
            let Some(d) = self.derivative(1, w) else { continue };
            let fd = (self.eval(w + h) - self.eval(w - h)) / (2.0 * h);
            let scale = d.abs().max(self.eval(w).abs() / self.length_scale());
            if (fd - d).abs() > DERIVATIVE_CHECK_RTOL * scale + 1e-300 {
                return Err(w);
            }
        }
        Ok(())
    }
}

impl fmt::Display for ShiftFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

// With s = sigma(w/a), d/dw s = s (1 - s) / a, so every derivative is a
// polynomial P_n(s): P_0 = s, P_{n+1}(s) = P_n'(s) s (1 - s) / a.
fn logistic_derivative(a: f64, n: usize, w: f64) -> f64 {
    let mut poly: Vec<f64> = vec![0.0, 1.0];
    for _ in 0..n {
        let mut dp: Vec<f64> = (1..poly.len()).map(|k| k as f64 * poly[k]).collect();
        if dp.is_empty() {
            dp.push(0.0);
        }
        // multiply by (s - s^2) / a
        let mut next = vec![0.0; dp.len() + 2];
        for (k, &c) in dp.iter().enumerate() {
            next[k + 1] += c / a;
            next[k + 2] -= c / a;
        }
        poly = next;
    }
    let s = 1.0 / (1.0 + libm::exp(-w / a));
    poly.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}
