//! Truncated operator series, strict absolute monotonicity, and the
//! ordering checks that place the moment bound below every bound built from
//! a strictly absolutely monotonic shift function.
//!
//! Sign bookkeeping: with `P(q) = sum_n P_n q^n`, `P_n = (-1)^n m_n / n!`,
//! the expectation `E[f(z + Z)]` is `P(-q) f(z) = sum_n (m_n / n!) f^(n)(z)`.
//! [`OperatorSeries`] built by [`series_coefficients`] therefore stores
//! `m_n / n!` directly, so that [`apply_operator_series`] realizes `E[f(z + Z)]`.

use alloc::vec::Vec;

use crate::distributions::{positive_fractional_moment, raw_moment, ContinuousDistribution};
use crate::extended::Extended;
use crate::quadrature::{convolution_expectation, convolution_over, Tolerance};
use crate::shift::ShiftFunction;
use crate::special::factorial;
use crate::Error;

/// Default number of derivative orders probed by [`sam_check`].
pub const DEFAULT_SAM_ORDER: usize = 16;
/// Tolerance of the convolution chain, relative to `max(1, (a))`.
pub const CHAIN_TOL: f64 = 1e-8;
// Consecutive non-shrinking terms after which a series is called divergent.
const DIVERGENT_RUN: usize = 5;
const CONVERGED_RTOL: f64 = 1e-12;

/// Coefficients `G_0 .. G_N` of a truncated operator `sum_n G_n q^n`,
/// applied with `q` acting as `d/dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSeries {
    coefficients: Vec<f64>,
}

impl OperatorSeries {
    pub fn new(coefficients: Vec<f64>) -> Result<Self, Error> {
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("operator series needs at least one coefficient"));
        }
        if let Some(&bad) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter { what: "coefficient", value: bad });
        }
        Ok(OperatorSeries { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn truncation_order(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// `m_n / n!` for `n = 0..=order`.
pub fn series_coefficients<D: ContinuousDistribution + ?Sized>(
    d: &D,
    order: usize,
    tol: &Tolerance,
) -> Result<OperatorSeries, Error> {
    let mut c = Vec::with_capacity(order + 1);
    for n in 0..=order {
        c.push(raw_moment(d, n as u32, tol)? / factorial(n));
    }
    OperatorSeries::new(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStatus {
    /// Trailing terms are negligible against the sum.
    Converged,
    /// Trailing nonzero terms stopped shrinking.
    Diverging,
    /// Neither test is decisive at this truncation.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesApplication {
    pub value: f64,
    pub partial_sums: Vec<f64>,
    pub status: SeriesStatus,
}

/// `sum_n G_n f^(n)(z)` with its partial sums.
pub fn apply_operator_series(s: &OperatorSeries, f: &ShiftFunction, z: f64) -> Result<SeriesApplication, Error> {
    let mut terms = Vec::with_capacity(s.coefficients.len());
    let mut partial_sums = Vec::with_capacity(s.coefficients.len());
    let mut sum = 0.0;
    for (n, &g) in s.coefficients.iter().enumerate() {
        let dn = f.derivative(n, z).ok_or(Error::MissingDerivativeOracle { order: n, at: z })?;
        let t = if g == 0.0 || dn == 0.0 { 0.0 } else { g * dn };
        sum += t;
        terms.push(t);
        partial_sums.push(sum);
    }
    let terminated = f.polynomial_degree().is_some_and(|k| k <= s.truncation_order());
    let status = if terminated { SeriesStatus::Converged } else { classify(&terms, sum) };
    Ok(SeriesApplication { value: sum, status, partial_sums })
}

fn classify(terms: &[f64], sum: f64) -> SeriesStatus {
    let nonzero: Vec<f64> = terms.iter().map(|t| t.abs()).filter(|&t| t > 0.0).collect();
    let tail_len = DIVERGENT_RUN.min(terms.len());
    let tail_max = terms[terms.len() - tail_len..].iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if tail_max <= CONVERGED_RTOL * sum.abs() || nonzero.len() < 2 && tail_max == 0.0 {
        return SeriesStatus::Converged;
    }
    if nonzero.len() > DIVERGENT_RUN {
        let run = &nonzero[nonzero.len() - DIVERGENT_RUN - 1..];
        if run.windows(2).all(|w| w[1] >= w[0]) || !sum.is_finite() {
            return SeriesStatus::Diverging;
        }
    }
    SeriesStatus::Inconclusive
}

/// Relative error of the truncated series for `e^{a w}` at `z` against
/// `e^{a z} M(a)`.
pub fn exponential_eigenfunction_residual<D: ContinuousDistribution + ?Sized>(
    d: &D,
    alpha: f64,
    z: f64,
    order: usize,
    tol: &Tolerance,
) -> Result<f64, Error> {
    if !d.mgf_domain().contains(alpha) {
        return Err(Error::InvalidInput("alpha lies outside the MGF domain"));
    }
    let f = ShiftFunction::exponential(alpha)?;
    let m =
        crate::distributions::mgf(d, alpha, tol).finite().ok_or(Error::InvalidInput("MGF could not be evaluated"))?;
    let series = series_coefficients(d, order, tol)?;
    let applied = apply_operator_series(&series, &f, z)?;
    let exact = f.eval(z) * m;
    Ok((applied.value - exact).abs() / exact)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamViolation {
    pub order: usize,
    pub at: f64,
    pub value: f64,
}

/// Strict absolute monotonicity up to a finite order at probed points only.
#[derive(Debug, Clone, PartialEq)]
pub struct SamReport {
    pub is_sam: bool,
    pub first_violation: Option<SamViolation>,
    pub orders_checked: usize,
    pub points_checked: Vec<f64>,
}

/// Checks `f^(n)(z) > 0` for `n = 0..=order` at every point, lowest order
/// first.
pub fn sam_check(f: &ShiftFunction, points: &[f64], order: usize) -> Result<SamReport, Error> {
    let mut first_violation = None;
    'orders: for n in 0..=order {
        for &z in points {
            let v = f.derivative(n, z).ok_or(Error::MissingDerivativeOracle { order: n, at: z })?;
            if !(v > 0.0) {
                first_violation = Some(SamViolation { order: n, at: z, value: v });
                break 'orders;
            }
        }
    }
    Ok(SamReport {
        is_sam: first_violation.is_none(),
        first_violation,
        orders_checked: order,
        points_checked: points.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyReport {
    /// `min_n a_n / b_n`
    pub r: f64,
    /// `sum a / sum b`
    pub ratio: f64,
    /// `max_n a_n / b_n`
    pub big_r: f64,
    pub holds: bool,
}

/// `min a_n/b_n <= sum a / sum b <= max a_n/b_n` for positive sequences.
///
/// The verdict allows a relative rounding slack of `4 n eps`.
pub fn cauchy_third_inequality(a: &[f64], b: &[f64]) -> Result<CauchyReport, Error> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("sequences must be non-empty"));
    }
    for (i, (&ai, &bi)) in a.iter().zip(b).enumerate() {
        if !(ai > 0.0 && ai.is_finite() && bi > 0.0 && bi.is_finite()) {
            return Err(Error::NonPositiveEntry { index: i });
        }
    }
    let (mut r, mut big_r) = (f64::INFINITY, 0.0f64);
    for (&ai, &bi) in a.iter().zip(b) {
        let q = ai / bi;
        r = r.min(q);
        big_r = big_r.max(q);
    }
    let ratio = a.iter().sum::<f64>() / b.iter().sum::<f64>();
    let slack = 4.0 * a.len() as f64 * f64::EPSILON;
    let holds = r <= ratio * (1.0 + slack) && ratio <= big_r * (1.0 + slack);
    Ok(CauchyReport { r, ratio, big_r, holds })
}

/// The four restricted convolutions at one shift point `z <= 0`:
/// full line, `y >= 0`, `f` replaced by `f u`, and `y >= max(0, -z)`.
/// A divergent integral is [`Extended::Infinite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionChain {
    pub a: Extended,
    pub b: Extended,
    pub c: Extended,
    pub d: Extended,
}

impl ConvolutionChain {
    /// `(c) = (d) <= (b) <= (a)` within [`CHAIN_TOL`].
    pub fn holds(&self) -> bool {
        let slack = CHAIN_TOL * self.a.finite().map_or(1.0, |v| v.abs().max(1.0));
        let le = |lo: Extended, hi: Extended| match (lo, hi) {
            (_, Extended::Infinite) => true,
            (Extended::Finite(l), Extended::Finite(h)) => l <= h + slack,
            _ => false,
        };
        let eq = match (self.c, self.d) {
            (Extended::Finite(c), Extended::Finite(d)) => (c - d).abs() <= slack,
            (Extended::Infinite, Extended::Infinite) => true,
            _ => false,
        };
        eq && le(self.d, self.b) && le(self.b, self.a)
    }
}

fn soft_conv(r: Result<crate::quadrature::QuadratureResult, Error>) -> Result<Extended, Error> {
    match r {
        Ok(q) => Ok(Extended::Finite(q.value)),
        Err(Error::Diverged) => Ok(Extended::Infinite),
        Err(e) => Err(e),
    }
}

/// Evaluates the four convolutions of [`ConvolutionChain`] by quadrature.
pub fn convolution_chain<D: ContinuousDistribution + ?Sized>(
    d: &D,
    f: &ShiftFunction,
    z: f64,
    tol: &Tolerance,
) -> Result<ConvolutionChain, Error> {
    Ok(ConvolutionChain {
        a: soft_conv(convolution_expectation(d, f, z, tol))?,
        b: soft_conv(convolution_over(d, f, z, 0.0, tol))?,
        c: soft_conv(convolution_expectation(d, &f.positive_part(), z, tol))?,
        d: soft_conv(convolution_over(d, f, z, 0.0f64.max(-z), tol))?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingPoint {
    pub z: f64,
    /// `[sum (m_n+/n!) f^(n)(z)] / [sum (x^n/n!) f^(n)(z)]`
    pub series_ratio: f64,
    pub series_ok: bool,
    pub chain: ConvolutionChain,
    pub chain_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub x: f64,
    pub order: usize,
    /// `min_{n <= N} m_n+ / x^n` and the order attaining it.
    pub min_moment_ratio: f64,
    pub min_order: usize,
    pub points: Vec<OrderingPoint>,
    pub passed: bool,
}

/// For each `z` in `z_grid` (all `<= 0`): checks
/// `min_n m_n+/x^n <= [sum (m_n+/n!) f^(n)(z)] / [sum (x^n/n!) f^(n)(z)]`
/// through order `order`, and the convolution chain at `z`.
///
/// `f` must pass [`sam_check`] on `z_grid` through `order`.
pub fn ordering_check<D: ContinuousDistribution + ?Sized>(
    d: &D,
    f: &ShiftFunction,
    x: f64,
    z_grid: &[f64],
    order: usize,
    tol: &Tolerance,
) -> Result<OrderingReport, Error> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput("threshold x must be positive and finite"));
    }
    if z_grid.is_empty() || z_grid.iter().any(|&z| !(z <= 0.0)) {
        return Err(Error::InvalidInput("shift points must be non-positive"));
    }
    let sam = sam_check(f, z_grid, order)?;
    if let Some(v) = sam.first_violation {
        return Err(Error::NotStrictlyAbsolutelyMonotonic { order: v.order, at: v.at });
    }

    let mut m_plus = Vec::with_capacity(order + 1);
    for n in 0..=order {
        match positive_fractional_moment(d, n as f64, tol)? {
            Extended::Finite(v) if v > 0.0 => m_plus.push(v),
            Extended::Infinite => return Err(Error::Diverged),
            _ => return Err(Error::NonPositiveEntry { index: n }),
        }
    }
    let (min_order, min_moment_ratio) = m_plus
        .iter()
        .enumerate()
        .map(|(n, &m)| (n, m / libm::pow(x, n as f64)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });

    let mut points = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let mut a = Vec::with_capacity(order + 1);
        let mut b = Vec::with_capacity(order + 1);
        for (n, &m) in m_plus.iter().enumerate().take(order + 1) {
            let w = f.derivative(n, z).ok_or(Error::MissingDerivativeOracle { order: n, at: z })? / factorial(n);
            a.push(m * w);
            b.push(libm::pow(x, n as f64) * w);
        }
        let cauchy = cauchy_third_inequality(&a, &b)?;
        let series_ok =
            cauchy.holds && min_moment_ratio <= cauchy.ratio * (1.0 + 4.0 * (order + 1) as f64 * f64::EPSILON);
        let chain = convolution_chain(d, f, z, tol)?;
        points.push(OrderingPoint { z, series_ratio: cauchy.ratio, series_ok, chain_ok: chain.holds(), chain });
    }
    let passed = points.iter().all(|p| p.series_ok && p.chain_ok);
    Ok(OrderingReport { x, order, min_moment_ratio, min_order, points, passed })
}
