//! Upper bounds on `Pr[Z >= x]`.
//!
//! Every calculator returns a [`BoundReport`] carrying the raw bound (which
//! may exceed 1 or be infinite), its clamp to `[0, 1]`, the optimizing
//! parameters and a status. Precondition failures are errors; numerical
//! trouble (divergent integrals, unreached tolerances, an empty MGF domain)
//! is reported through [`BoundStatus`].

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::distributions::{
    exact_upper_tail, log_mgf, positive_exponential_ratio, positive_moment_ratio, ContinuousDistribution,
};
use crate::extended::Extended;
use crate::optimize::{minimize_scalar, ScalarMinimum, SearchInterval, DEFAULT_ARGMIN_TOL};
use crate::quadrature::{convolution_expectation, Tolerance};
use crate::shift::ShiftFunction;
use crate::Error;

/// Offset keeping the Chernoff exponent off the ends of its domain.
pub const CHERNOFF_EPS: f64 = 1e-9;
/// Default upper end of the moment-order search.
pub const MOMENT_ALPHA_MAX: f64 = 64.0;
const MOMENT_ALPHA_CAP: f64 = 4096.0;
/// Gap kept between the shift point and the zero of a step-like denominator.
pub const Z_EPS: f64 = 1e-6;
/// Slack used by the ordering verdict of [`compare_all`].
pub const ORDERING_SLACK: f64 = 1e-6;
/// Smoothing width of the logistic row in [`compare_all`].
pub const DEFAULT_LOGISTIC_ALPHA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMethod {
    Markov,
    Chernoff,
    Moment,
    Operational,
    HeavisideExact,
    Logistic,
    TruncatedExp,
    TruncatedPower,
}

impl BoundMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMethod::Markov => "markov",
            BoundMethod::Chernoff => "chernoff",
            BoundMethod::Moment => "moment",
            BoundMethod::Operational => "operational",
            BoundMethod::HeavisideExact => "heaviside_exact",
            BoundMethod::Logistic => "logistic",
            BoundMethod::TruncatedExp => "truncated_exp",
            BoundMethod::TruncatedPower => "truncated_power",
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundStatus {
    Ok,
    /// The raw bound exceeds 1.
    Clamped,
    /// No positive exponent keeps the MGF finite.
    MgfDomainEmpty,
    Diverged,
    NonConvergent,
}

impl BoundStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundStatus::Ok => "ok",
            BoundStatus::Clamped => "clamped",
            BoundStatus::MgfDomainEmpty => "mgf_domain_empty",
            BoundStatus::Diverged => "diverged",
            BoundStatus::NonConvergent => "nonconvergent",
        }
    }
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub method: BoundMethod,
    /// Shift function used, for operational-type rows.
    pub function: Option<String>,
    pub bound_raw: Extended,
    pub bound_clamped: f64,
    pub argmin_alpha: Option<f64>,
    pub argmin_z: Option<f64>,
    pub status: BoundStatus,
    /// Objective evaluations spent by the optimizer (1 for closed forms).
    pub evaluations: usize,
}

impl BoundReport {
    fn new(method: BoundMethod, raw: Extended) -> Self {
        let (clamped, status) = match raw {
            Extended::Finite(v) if v > 1.0 => (1.0, BoundStatus::Clamped),
            Extended::Finite(v) => (v.max(0.0), BoundStatus::Ok),
            Extended::Infinite => (1.0, BoundStatus::Diverged),
            Extended::NotComputed => (1.0, BoundStatus::NonConvergent),
        };
        BoundReport {
            method,
            function: None,
            bound_raw: raw,
            bound_clamped: clamped,
            argmin_alpha: None,
            argmin_z: None,
            status,
            evaluations: 1,
        }
    }

    fn domain_empty(method: BoundMethod) -> Self {
        BoundReport { status: BoundStatus::MgfDomainEmpty, ..BoundReport::new(method, Extended::Infinite) }
    }

    fn failed(method: BoundMethod, err: &Error) -> Self {
        let raw = match err {
            Error::Diverged => Extended::Infinite,
            _ => Extended::NotComputed,
        };
        BoundReport::new(method, raw)
    }

    fn with_function(mut self, f: &ShiftFunction) -> Self {
        self.function = Some(f.name());
        self
    }

    /// The raw bound when it is a finite number.
    pub fn raw(&self) -> Option<f64> {
        self.bound_raw.finite()
    }
}

fn require_positive_x(x: f64) -> Result<(), Error> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput("threshold x must be positive and finite"))
    }
}

// Numerical failures become statuses; anything else is a caller error.
fn soften<T>(r: Result<T, Error>) -> Result<Result<T, Error>, Error> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ (Error::Diverged | Error::NonConvergent { .. } | Error::NoFiniteValue)) => Ok(Err(e)),
        Err(e) => Err(e),
    }
}

/// Markov's inequality on the positive part: `E[max(Z, 0)] / x`.
pub fn markov_bound<D: ContinuousDistribution + ?Sized>(d: &D, x: f64, tol: &Tolerance) -> Result<BoundReport, Error> {
    require_positive_x(x)?;
    Ok(match soften(positive_moment_ratio(d, 1.0, x, tol))? {
        Ok(raw) => BoundReport::new(BoundMethod::Markov, raw),
        Err(e) => BoundReport::failed(BoundMethod::Markov, &e),
    })
}

/// Classical Chernoff bound `min_{t > 0} M(t) e^{-tx}`.
///
/// The exponent ranges over `(eps, t_hi (1 - eps))`, and the `t -> 0`
/// limit (value 1) is always a candidate. Laws whose MGF is infinite for
/// every `t > 0` report [`BoundStatus::MgfDomainEmpty`].
pub fn chernoff_bound<D: ContinuousDistribution + ?Sized>(
    d: &D,
    x: f64,
    tol: &Tolerance,
) -> Result<BoundReport, Error> {
    if !x.is_finite() {
        return Err(Error::InvalidInput("threshold x must be finite"));
    }
    let domain = d.mgf_domain();
    if !domain.has_positive_part() {
        return Ok(BoundReport::domain_empty(BoundMethod::Chernoff));
    }
    let interval = if domain.upper.is_finite() {
        SearchInterval::bounded(CHERNOFF_EPS, domain.upper * (1.0 - CHERNOFF_EPS))?
    } else {
        SearchInterval::semi_infinite(CHERNOFF_EPS, 1.0 / d.scale())?
    };
    let objective = |t: f64| log_mgf(d, t, tol).map(|l| l - t * x);
    let mut report = match minimize_scalar(objective, interval, DEFAULT_ARGMIN_TOL) {
        Ok(m) if m.value < 0.0 => {
            let mut r = BoundReport::new(BoundMethod::Chernoff, Extended::from_f64(libm::exp(m.value)));
            r.argmin_alpha = Some(m.argmin);
            r.evaluations = m.evaluations;
            r
        }
        Ok(m) => {
            let mut r = BoundReport::new(BoundMethod::Chernoff, Extended::Finite(1.0));
            r.argmin_alpha = Some(0.0);
            r.evaluations = m.evaluations;
            r
        }
        Err(Error::NoFiniteValue) => {
            let mut r = BoundReport::new(BoundMethod::Chernoff, Extended::Finite(1.0));
            r.argmin_alpha = Some(0.0);
            r
        }
        Err(e) => return Err(e),
    };
    report.evaluations = report.evaluations.max(1);
    Ok(report)
}

/// `m_a+ / x^a`, the moment-bound objective at a single order.
pub fn moment_objective<D: ContinuousDistribution + ?Sized>(
    d: &D,
    alpha: f64,
    x: f64,
    tol: &Tolerance,
) -> Result<Extended, Error> {
    require_positive_x(x)?;
    positive_moment_ratio(d, alpha, x, tol)
}

// Minimizes an order-indexed log objective on [0, a_max], doubling a_max
// while the minimum sits on the upper end with a finite value.
fn minimize_over_order<G: FnMut(f64) -> Extended>(mut g: G) -> Result<ScalarMinimum, Error> {
    let mut a_max = MOMENT_ALPHA_MAX;
    let mut evaluations = 0;
    loop {
        let mut m = minimize_scalar(&mut g, SearchInterval::bounded(0.0, a_max)?, DEFAULT_ARGMIN_TOL)?;
        evaluations += m.evaluations;
        m.evaluations = evaluations;
        let at_top = m.domain_clipped && m.argmin > 0.5 * a_max;
        if !at_top || !m.value.is_finite() || a_max >= MOMENT_ALPHA_CAP {
            return Ok(m);
        }
        a_max *= 2.0;
    }
}

fn order_report(method: BoundMethod, m: Result<ScalarMinimum, Error>) -> Result<BoundReport, Error> {
    Ok(match soften(m)? {
        Ok(m) => {
            let mut r = BoundReport::new(method, Extended::Finite(libm::exp(m.value)));
            r.argmin_alpha = Some(m.argmin);
            r.evaluations = m.evaluations;
            r
        }
        Err(e) => BoundReport::failed(method, &e),
    })
}

/// Fractional-moment bound `min_{a >= 0} m_a+ / x^a`.
///
/// The search starts on `[0, 64]` and is widened while the minimum is
/// pinned at the upper end. `a = 0` gives `Pr[Z > 0]`. At or beyond the
/// top of a bounded support the infimum is 0, approached as `a -> inf`.
pub fn moment_bound<D: ContinuousDistribution + ?Sized>(d: &D, x: f64, tol: &Tolerance) -> Result<BoundReport, Error> {
    require_positive_x(x)?;
    if x >= d.support().1 {
        return Ok(BoundReport::new(BoundMethod::Moment, Extended::Finite(0.0)));
    }
    let m0 = match soften(positive_moment_ratio(d, 0.0, x, tol))? {
        Ok(v) => v,
        Err(e) => return Ok(BoundReport::failed(BoundMethod::Moment, &e)),
    };
    if m0 == Extended::Finite(0.0) {
        let mut r = BoundReport::new(BoundMethod::Moment, m0);
        r.argmin_alpha = Some(0.0);
        return Ok(r);
    }
    let objective = |a: f64| positive_moment_ratio(d, a, x, tol).map_or(Extended::NotComputed, Extended::ln);
    order_report(BoundMethod::Moment, minimize_over_order(objective))
}

/// `E[f(z + Z)] / f(x + z)`; [`Extended::Infinite`] when the numerator
/// diverges.
pub fn operational_ratio<D: ContinuousDistribution + ?Sized>(
    d: &D,
    f: &ShiftFunction,
    x: f64,
    z: f64,
    tol: &Tolerance,
) -> Result<Extended, Error> {
    let denominator = f.eval(x + z);
    if !(denominator > 0.0) {
        return Err(Error::DenominatorZero { at: x + z });
    }
    match convolution_expectation(d, f, z, tol) {
        Ok(r) => Ok(Extended::from_f64(r.value / denominator)),
        Err(Error::Diverged) => Ok(Extended::Infinite),
        Err(e) => Err(e),
    }
}

/// Default shift-point search range for `f` at threshold `x`.
///
/// For step-like `f` vanishing below `c` this is `(c - x + Z_EPS, c - x + 8s]`;
/// otherwise `[-x - 4s, -x + 4s]`, with `s` the law's scale.
pub fn default_z_domain<D: ContinuousDistribution + ?Sized>(
    d: &D,
    f: &ShiftFunction,
    x: f64,
) -> Result<SearchInterval, Error> {
    let s = d.scale().max(1e-3);
    match f.support_cutoff() {
        Some(c) => SearchInterval::bounded(c - x + Z_EPS, c - x + 8.0 * s),
        None => SearchInterval::bounded(-x - 4.0 * s, -x + 4.0 * s),
    }
}

fn ratio_objective<'a, D: ContinuousDistribution + ?Sized>(
    d: &'a D,
    f: &ShiftFunction,
    x: f64,
    tol: &Tolerance,
) -> impl FnMut(f64) -> Extended + 'a {
    let f = f.clone();
    let tol = *tol;
    move |z| match operational_ratio(d, &f, x, z, &tol) {
        Ok(v) => v.ln(),
        Err(Error::DenominatorZero { .. }) => Extended::Infinite,
        Err(_) => Extended::NotComputed,
    }
}

/// Operational bound for a fixed `f`, minimized over the shift point `z`.
pub fn operational_bound<D: ContinuousDistribution + ?Sized>(
    d: &D,
    f: &ShiftFunction,
    x: f64,
    z_domain: SearchInterval,
    tol: &Tolerance,
) -> Result<BoundReport, Error> {
    if !x.is_finite() {
        return Err(Error::InvalidInput("threshold x must be finite"));
    }
    operational_with(BoundMethod::Operational, d, f, x, z_domain, tol)
}

fn operational_with<D: ContinuousDistribution + ?Sized>(
    method: BoundMethod,
    d: &D,
    f: &ShiftFunction,
    x: f64,
    z_domain: SearchInterval,
    tol: &Tolerance,
) -> Result<BoundReport, Error> {
    let m = minimize_scalar(ratio_objective(d, f, x, tol), z_domain, DEFAULT_ARGMIN_TOL);
    Ok(match soften(m)? {
        Ok(m) => {
            let mut r = BoundReport::new(method, Extended::from_f64(libm::exp(m.value)));
            r.argmin_z = Some(m.argmin);
            r.evaluations = m.evaluations;
            r.with_function(f)
        }
        Err(e) => BoundReport::failed(method, &e).with_function(f),
    })
}

/// The step-function bound, which is the exact tail `Pr[Z >= x]`.
pub fn heaviside_chernoff<D: ContinuousDistribution + ?Sized>(
    d: &D,
    x: f64,
    tol: &Tolerance,
) -> Result<BoundReport, Error> {
    Ok(match soften(exact_upper_tail(d, x, tol))? {
        Ok(p) => BoundReport::new(BoundMethod::HeavisideExact, Extended::Finite(p)),
        Err(e) => BoundReport::failed(BoundMethod::HeavisideExact, &e),
    })
}

/// Logistic-smoothed step bounds for each width in `alphas`, which must be
/// positive and strictly decreasing. Each row is optimized over `z`.
pub fn logistic_bound_sweep<D: ContinuousDistribution + ?Sized>(
    d: &D,
    x: f64,
    alphas: &[f64],
    tol: &Tolerance,
) -> Result<Vec<BoundReport>, Error> {
    if !x.is_finite() {
        return Err(Error::InvalidInput("threshold x must be finite"));
    }
    if alphas.is_empty() {
        return Err(Error::InvalidInput("logistic sweep needs at least one width"));
    }
    if alphas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("logistic widths must be strictly decreasing"));
    }
    alphas
        .iter()
        .map(|&a| {
            let f = ShiftFunction::logistic(a)?;
            let domain = default_z_domain(d, &f, x)?;
            let mut r = operational_with(BoundMethod::Logistic, d, &f, x, domain, tol)?;
            r.argmin_alpha = Some(a);
            Ok(r)
        })
        .collect()
}

/// Bounds from the truncated families `e^{a w} u(w)` and `w^a u(w)`, each
/// at `z = 0` and optimized over `a` by quadrature.
/// The truncated-power row reproduces [`moment_bound`].
pub fn truncated_bounds<D: ContinuousDistribution + ?Sized>(
    d: &D,
    x: f64,
    tol: &Tolerance,
) -> Result<Vec<BoundReport>, Error> {
    require_positive_x(x)?;
    Ok(alloc::vec![truncated_exponential_bound(d, x, tol)?, truncated_power_bound(d, x, tol)?])
}

fn ln_conv_at_zero<D: ContinuousDistribution + ?Sized>(
    d: &D,
    f: Result<ShiftFunction, Error>,
    tol: &Tolerance,
) -> Extended {
    let Ok(f) = f else { return Extended::NotComputed };
    match convolution_expectation(d, &f, 0.0, tol) {
        Ok(r) => Extended::from_f64(r.value).ln(),
        Err(Error::Diverged) => Extended::Infinite,
        Err(_) => Extended::NotComputed,
    }
}

/// `min_a E[e^{aZ} u(Z)] / e^{ax}` at `z = 0`; `a = 0` gives `Pr[Z > 0]`.
pub fn truncated_exponential_bound<D: ContinuousDistribution + ?Sized>(
    d: &D,
    x: f64,
    tol: &Tolerance,
) -> Result<BoundReport, Error> {
    require_positive_x(x)?;
    let domain = d.mgf_domain();
    if !domain.has_positive_part() {
        return Ok(BoundReport::domain_empty(BoundMethod::TruncatedExp));
    }
    let interval = if domain.upper.is_finite() {
        SearchInterval::bounded(0.0, domain.upper * (1.0 - CHERNOFF_EPS))?
    } else {
        SearchInterval::semi_infinite(0.0, 1.0 / d.scale())?
    };
    let objective = |a: f64| match positive_exponential_ratio(d, a, x, tol) {
        Ok(v) => v.ln(),
        Err(_) => Extended::NotComputed,
    };
    let m = minimize_scalar(objective, interval, DEFAULT_ARGMIN_TOL);
    let mut r = order_report(BoundMethod::TruncatedExp, m)?;
    r.argmin_z = Some(0.0);
    let a = r.argmin_alpha.unwrap_or(0.0);
    Ok(r.with_function(&ShiftFunction::truncated_exponential(a)?))
}

/// `min_a E[Z^a u(Z)] / x^a` at `z = 0`, by convolution quadrature.
pub fn truncated_power_bound<D: ContinuousDistribution + ?Sized>(
    d: &D,
    x: f64,
    tol: &Tolerance,
) -> Result<BoundReport, Error> {
    require_positive_x(x)?;
    if x >= d.support().1 {
        let r = BoundReport::new(BoundMethod::TruncatedPower, Extended::Finite(0.0));
        return Ok(BoundReport { argmin_z: Some(0.0), ..r });
    }
    let ln_x = libm::log(x);
    let objective = |a: f64| ln_conv_at_zero(d, ShiftFunction::truncated_power(a), tol).map(|l| l - a * ln_x);
    let mut r = order_report(BoundMethod::TruncatedPower, minimize_over_order(objective))?;
    r.argmin_z = Some(0.0);
    let a = r.argmin_alpha.unwrap_or(0.0);
    Ok(r.with_function(&ShiftFunction::truncated_power(a)?))
}

/// Every bound at one threshold, with the ordering verdict
/// `exact <= moment (+ slack)` and, when the Chernoff row is feasible,
/// `moment <= chernoff (+ slack)`. Comparisons use raw values.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub dist: String,
    pub x: f64,
    pub rows: Vec<BoundReport>,
    pub ordering_ok: bool,
}

impl Comparison {
    pub fn row(&self, method: BoundMethod) -> Option<&BoundReport> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn exact(&self) -> Option<f64> {
        self.row(BoundMethod::HeavisideExact).and_then(BoundReport::raw)
    }
}

/// Rows in order: exact tail, Markov, Chernoff, moment, operational with
/// the step function, logistic (width [`DEFAULT_LOGISTIC_ALPHA`]),
/// truncated exponential, truncated power.
pub fn compare_all<D: ContinuousDistribution + ?Sized>(d: &D, x: f64, tol: &Tolerance) -> Result<Comparison, Error> {
    require_positive_x(x)?;
    let step = ShiftFunction::step();
    let mut rows = Vec::with_capacity(8);
    rows.push(heaviside_chernoff(d, x, tol)?);
    rows.push(markov_bound(d, x, tol)?);
    rows.push(chernoff_bound(d, x, tol)?);
    rows.push(moment_bound(d, x, tol)?);
    rows.push(operational_bound(d, &step, x, default_z_domain(d, &step, x)?, tol)?);
    rows.extend(logistic_bound_sweep(d, x, &[DEFAULT_LOGISTIC_ALPHA], tol)?);
    rows.extend(truncated_bounds(d, x, tol)?);

    let mut cmp = Comparison { dist: d.name(), x, rows, ordering_ok: false };
    cmp.ordering_ok = ordering_holds(&cmp);
    Ok(cmp)
}

fn ordering_holds(cmp: &Comparison) -> bool {
    let (Some(exact), Some(moment)) = (cmp.exact(), cmp.row(BoundMethod::Moment).and_then(BoundReport::raw)) else {
        return false;
    };
    if exact > moment + ORDERING_SLACK {
        return false;
    }
    match cmp.row(BoundMethod::Chernoff) {
        Some(c) if c.status != BoundStatus::MgfDomainEmpty => match c.bound_raw {
            Extended::Finite(v) => moment <= v + ORDERING_SLACK,
            Extended::Infinite => true,
            Extended::NotComputed => false,
        },
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Distribution;
    use approx::assert_relative_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }
    fn exp1() -> Distribution {
        Distribution::exponential(1.0).unwrap()
    }
    fn normal() -> Distribution {
        Distribution::standard_normal()
    }

    #[test]
    fn markov_examples() {
        let r = markov_bound(&exp1(), 2.0, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 0.5, max_relative = 1e-9);
        assert_eq!(r.status, BoundStatus::Ok);
        let r = markov_bound(&exp1(), 0.5, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 2.0, max_relative = 1e-9);
        assert_eq!((r.bound_clamped, r.status), (1.0, BoundStatus::Clamped));
        let r = markov_bound(&normal(), 1.0, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 0.398_942_280_401_432_7, max_relative = 1e-9);
        assert!(markov_bound(&normal(), 0.0, &tol()).is_err());
    }

    #[test]
    fn chernoff_examples() {
        let r = chernoff_bound(&normal(), 1.0, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), (-0.5f64).exp(), max_relative = 1e-9);
        assert_relative_eq!(r.argmin_alpha.unwrap(), 1.0, epsilon = 1e-6);
        let r = chernoff_bound(&exp1(), 2.0, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 2.0 * (-1.0f64).exp(), max_relative = 1e-9);
        assert_relative_eq!(r.argmin_alpha.unwrap(), 0.5, epsilon = 1e-6);
        let r = chernoff_bound(&Distribution::lognormal(0.0, 1.0).unwrap(), 2.0, &tol()).unwrap();
        assert_eq!((r.bound_clamped, r.status), (1.0, BoundStatus::MgfDomainEmpty));
    }

    #[test]
    fn chernoff_below_mean_is_trivial() {
        let r = chernoff_bound(&exp1(), 0.5, &tol()).unwrap();
        assert_eq!(r.raw(), Some(1.0));
        assert_eq!(r.argmin_alpha, Some(0.0));
    }

    #[test]
    fn moment_examples() {
        let r = moment_bound(&exp1(), 2.0, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 0.469_944_946_7, max_relative = 1e-8);
        assert_relative_eq!(r.argmin_alpha.unwrap(), 1.479_687_4, epsilon = 1e-5);
        let r = moment_bound(&normal(), 1.0, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 0.397_369_9, max_relative = 1e-6);
        assert!(r.raw().unwrap() <= (-0.5f64).exp());
        let r = moment_bound(&Distribution::gamma(2.0, 1.0).unwrap(), 1.5, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 1.0, max_relative = 1e-9);
        assert_eq!(r.argmin_alpha, Some(0.0));
    }

    #[test]
    fn moment_bound_is_pr_positive_at_small_threshold() {
        let r = moment_bound(&normal(), 0.5, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 0.5, max_relative = 1e-9);
        let u = Distribution::uniform(-2.0, -1.0).unwrap();
        assert_eq!(moment_bound(&u, 1.0, &tol()).unwrap().raw(), Some(0.0));
    }

    #[test]
    fn markov_is_moment_objective_at_order_one() {
        for d in [exp1(), Distribution::gamma(2.0, 1.0).unwrap(), Distribution::lognormal(0.0, 1.0).unwrap()] {
            for x in [0.5, 1.0, 3.0] {
                let m = markov_bound(&d, x, &tol()).unwrap().raw().unwrap();
                let o = moment_objective(&d, 1.0, x, &tol()).unwrap().finite().unwrap();
                assert!((m - o).abs() <= 1e-9 * m);
            }
        }
    }

    #[test]
    fn operational_ratio_examples() {
        let e = ShiftFunction::exponential(1.0).unwrap();
        for z in [-1.0, 0.0, 1.0, 5.0] {
            let r = operational_ratio(&normal(), &e, 1.0, z, &tol()).unwrap().finite().unwrap();
            assert_relative_eq!(r, (-0.5f64).exp(), max_relative = 1e-8);
        }
        let one = ShiftFunction::exponential(0.0).unwrap();
        assert_relative_eq!(
            operational_ratio(&normal(), &one, 3.0, -2.0, &tol()).unwrap().finite().unwrap(),
            1.0,
            max_relative = 1e-9
        );
        let p = ShiftFunction::truncated_power(1.0).unwrap();
        assert_relative_eq!(
            operational_ratio(&exp1(), &p, 2.0, 0.0, &tol()).unwrap().finite().unwrap(),
            0.5,
            max_relative = 1e-9
        );
        assert!(matches!(
            operational_ratio(&exp1(), &ShiftFunction::step(), 2.0, -3.0, &tol()),
            Err(Error::DenominatorZero { .. })
        ));
        let big = ShiftFunction::exponential(2.0).unwrap();
        assert_eq!(operational_ratio(&exp1(), &big, 1.0, 0.0, &tol()).unwrap(), Extended::Infinite);
    }

    #[test]
    fn operational_step_reaches_exact_tail() {
        let step = ShiftFunction::step();
        let r =
            operational_bound(&normal(), &step, 1.0, default_z_domain(&normal(), &step, 1.0).unwrap(), &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 0.158_655_253_931_457, max_relative = 1e-5);
        assert!(r.argmin_z.unwrap() < -0.999);
    }

    #[test]
    fn operational_exponential_matches_chernoff_objective() {
        let e = ShiftFunction::exponential(0.5).unwrap();
        let dom = SearchInterval::bounded(-3.0, 3.0).unwrap();
        let r = operational_bound(&exp1(), &e, 2.0, dom, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 2.0 * (-1.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn logistic_bound_is_bracketed() {
        let r = logistic_bound_sweep(&normal(), 1.0, &[0.1], &tol()).unwrap();
        let v = r[0].raw().unwrap();
        assert!(v > 0.158_655 && v < 0.606_531, "{v}");
        assert_relative_eq!(v, 0.244_49, max_relative = 1e-3);
    }

    #[test]
    fn logistic_sweep_rejects_bad_widths() {
        assert!(logistic_bound_sweep(&normal(), 1.0, &[0.1, 0.2], &tol()).is_err());
        assert!(logistic_bound_sweep(&normal(), 1.0, &[0.1, -0.2], &tol()).is_err());
    }

    #[test]
    fn heaviside_examples() {
        let r = heaviside_chernoff(&exp1(), 2.0, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), (-2.0f64).exp(), max_relative = 1e-14);
        assert_eq!(heaviside_chernoff(&normal(), 0.0, &tol()).unwrap().raw(), Some(0.5));
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert_relative_eq!(heaviside_chernoff(&u, 0.25, &tol()).unwrap().raw().unwrap(), 0.75, max_relative = 1e-15);
    }

    #[test]
    fn truncated_families() {
        let rows = truncated_bounds(&exp1(), 2.0, &tol()).unwrap();
        let moment = moment_bound(&exp1(), 2.0, &tol()).unwrap().raw().unwrap();
        assert_relative_eq!(rows[1].raw().unwrap(), moment, max_relative = 1e-6);
        // on a positive law the truncation is inactive: same as Chernoff
        assert_relative_eq!(rows[0].raw().unwrap(), 2.0 * (-1.0f64).exp(), max_relative = 1e-8);
        let f = ShiftFunction::truncated_exponential(0.5).unwrap();
        let r = operational_ratio(&exp1(), &f, 2.0, 0.0, &tol()).unwrap().finite().unwrap();
        assert_relative_eq!(r, 2.0 * (-1.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn truncated_exponential_small_alpha_limit() {
        let n = normal();
        let limit = operational_ratio(&n, &ShiftFunction::truncated_exponential(1e-7).unwrap(), 1.0, 0.0, &tol())
            .unwrap()
            .finite()
            .unwrap();
        assert_relative_eq!(limit, 0.5, max_relative = 1e-6);
    }

    #[test]
    fn compare_all_examples() {
        let c = compare_all(&exp1(), 2.0, &tol()).unwrap();
        assert!(c.ordering_ok);
        assert_eq!(c.rows.len(), 8);
        let c = compare_all(&normal(), 1.0, &tol()).unwrap();
        assert!(c.ordering_ok);
        let c = compare_all(&Distribution::lognormal(0.0, 1.0).unwrap(), 2.0, &tol()).unwrap();
        assert!(c.ordering_ok);
        assert_eq!(c.row(BoundMethod::Chernoff).unwrap().status, BoundStatus::MgfDomainEmpty);
        let m = c.row(BoundMethod::Moment).unwrap().raw().unwrap();
        assert_relative_eq!(m, 0.786_449_7, max_relative = 1e-6);
        assert!(compare_all(&exp1(), 0.0, &tol()).is_err());
    }

    #[test]
    fn truncated_exponential_on_normal() {
        // min_a e^{a^2/2 - a} Phi(a), by scipy bounded minimization
        let r = truncated_exponential_bound(&normal(), 1.0, &tol()).unwrap();
        assert_relative_eq!(r.raw().unwrap(), 0.475_193_581_014_422_3, max_relative = 1e-7);
        assert_relative_eq!(r.argmin_alpha.unwrap(), 0.481_058_5, max_relative = 1e-5);
    }

    #[test]
    fn thresholds_past_a_bounded_support() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        for x in [1.0, 1.5] {
            let c = compare_all(&u, x, &tol()).unwrap();
            assert!(c.ordering_ok, "x={x}");
            assert_eq!(c.row(BoundMethod::Moment).unwrap().raw(), Some(0.0));
            assert_eq!(c.row(BoundMethod::TruncatedPower).unwrap().raw(), Some(0.0));
        }
    }
}
