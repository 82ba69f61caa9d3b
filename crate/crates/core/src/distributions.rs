//! Continuous probability laws: density, MGF, integer and fractional
//! moments, exact upper tails, and the positive restriction.
//!
//! MGF convention: `mgf(t) = E[e^{tZ}]`. In operator terms this is the
//! symbol `P(-q)` evaluated at `q = t`, the direction in which
//! `E[f(z + Z)] = P(-q) f(z)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::extended::Extended;
use crate::optimize::{minimize_scalar, SearchInterval};
use crate::quadrature::{integrate, integrate_range_checked, QuadratureResult, TailIntegral, Tolerance};
use crate::special::{factorial, gamma_q, ln_gamma, normal_sf};
use crate::Error;

/// Open interval `(lower, upper)` on which the MGF is finite, together
/// with `t = 0` (always finite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfDomain {
    pub lower: f64,
    pub upper: f64,
}

impl MgfDomain {
    pub fn contains(&self, t: f64) -> bool {
        t == 0.0 || (t > self.lower && t < self.upper)
    }

    /// No positive exponent keeps the MGF finite.
    pub fn has_positive_part(&self) -> bool {
        self.upper > 0.0
    }
}

/// A continuous law on the real line.
///
/// Implementors supply the density and whatever closed forms they have;
/// the free functions of this module fill the gaps by quadrature.
pub trait ContinuousDistribution {
    fn name(&self) -> String;
    fn params(&self) -> Vec<f64>;
    /// `(lower, upper)`; endpoints may be infinite.
    fn support(&self) -> (f64, f64);
    fn density(&self, z: f64) -> f64;
    fn ln_density(&self, z: f64) -> f64 {
        libm::log(self.density(z))
    }
    fn mgf_domain(&self) -> MgfDomain;
    /// `ln E[e^{tZ}]` for `t` inside [`Self::mgf_domain`], when known analytically.
    fn closed_form_log_mgf(&self, _t: f64) -> Option<f64> {
        None
    }
    fn closed_form_tail(&self, _x: f64) -> Option<f64> {
        None
    }
    fn moment_oracle(&self, _n: u32) -> Option<f64> {
        None
    }
    /// A point in the bulk of the law.
    fn center(&self) -> f64;
    /// Characteristic length; seeds the truncation width of tail integrals.
    fn scale(&self) -> f64;
}

impl<T: ContinuousDistribution + ?Sized> ContinuousDistribution for &T {
    fn name(&self) -> String {
        (**self).name()
    }
    fn params(&self) -> Vec<f64> {
        (**self).params()
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
    fn density(&self, z: f64) -> f64 {
        (**self).density(z)
    }
    fn ln_density(&self, z: f64) -> f64 {
        (**self).ln_density(z)
    }
    fn mgf_domain(&self) -> MgfDomain {
        (**self).mgf_domain()
    }
    fn closed_form_log_mgf(&self, t: f64) -> Option<f64> {
        (**self).closed_form_log_mgf(t)
    }
    fn closed_form_tail(&self, x: f64) -> Option<f64> {
        (**self).closed_form_tail(x)
    }
    fn moment_oracle(&self, n: u32) -> Option<f64> {
        (**self).moment_oracle(n)
    }
    fn center(&self) -> f64 {
        (**self).center()
    }
    fn scale(&self) -> f64 {
        (**self).scale()
    }
}

impl<T: ContinuousDistribution + ?Sized> ContinuousDistribution for Box<T> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn params(&self) -> Vec<f64> {
        (**self).params()
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
    fn density(&self, z: f64) -> f64 {
        (**self).density(z)
    }
    fn ln_density(&self, z: f64) -> f64 {
        (**self).ln_density(z)
    }
    fn mgf_domain(&self) -> MgfDomain {
        (**self).mgf_domain()
    }
    fn closed_form_log_mgf(&self, t: f64) -> Option<f64> {
        (**self).closed_form_log_mgf(t)
    }
    fn closed_form_tail(&self, x: f64) -> Option<f64> {
        (**self).closed_form_tail(x)
    }
    fn moment_oracle(&self, n: u32) -> Option<f64> {
        (**self).moment_oracle(n)
    }
    fn center(&self) -> f64 {
        (**self).center()
    }
    fn scale(&self) -> f64 {
        (**self).scale()
    }
}

/// The built-in catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Uniform { lower: f64, upper: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

fn positive(what: &'static str, value: f64) -> Result<f64, Error> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { what, value })
    }
}

fn finite(what: &'static str, value: f64) -> Result<f64, Error> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { what, value })
    }
}

impl Distribution {
    pub fn standard_normal() -> Self {
        Distribution::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self, Error> {
        Ok(Distribution::Normal { mean: finite("mean", mean)?, sd: positive("sd", sd)? })
    }

    pub fn exponential(rate: f64) -> Result<Self, Error> {
        Ok(Distribution::Exponential { rate: positive("rate", rate)? })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self, Error> {
        Ok(Distribution::Gamma { shape: positive("shape", shape)?, scale: positive("scale", scale)? })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self, Error> {
        let lower = finite("lower", lower)?;
        let upper = finite("upper", upper)?;
        if !(lower < upper) {
            return Err(Error::InvalidParameter { what: "upper", value: upper });
        }
        Ok(Distribution::Uniform { lower, upper })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self, Error> {
        Ok(Distribution::LogNormal { mu: finite("mu", mu)?, sigma: positive("sigma", sigma)? })
    }

    /// Short family name as used in `name:p1,p2` spec strings.
    pub fn family(&self) -> &'static str {
        match self {
            Distribution::Normal { .. } => "normal",
            Distribution::Exponential { .. } => "exp",
            Distribution::Gamma { .. } => "gamma",
            Distribution::Uniform { .. } => "uniform",
            Distribution::LogNormal { .. } => "lognormal",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.family())?;
        for (i, p) in self.params().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

impl ContinuousDistribution for Distribution {
    fn name(&self) -> String {
        format!("{self}")
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Distribution::Normal { mean, sd } => vec![mean, sd],
            Distribution::Exponential { rate } => vec![rate],
            Distribution::Gamma { shape, scale } => vec![shape, scale],
            Distribution::Uniform { lower, upper } => vec![lower, upper],
            Distribution::LogNormal { mu, sigma } => vec![mu, sigma],
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            Distribution::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution::Exponential { .. } | Distribution::Gamma { .. } | Distribution::LogNormal { .. } => {
                (0.0, f64::INFINITY)
            }
            Distribution::Uniform { lower, upper } => (lower, upper),
        }
    }

    fn density(&self, z: f64) -> f64 {
        match *self {
            Distribution::Uniform { lower, upper } => {
                if z >= lower && z <= upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            Distribution::Gamma { shape, scale } if z == 0.0 => {
                if shape < 1.0 {
                    f64::INFINITY
                } else if shape == 1.0 {
                    1.0 / scale
                } else {
                    0.0
                }
            }
            _ => libm::exp(self.ln_density(z)),
        }
    }

    fn ln_density(&self, z: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => {
                let u = (z - mean) / sd;
                -0.5 * u * u - libm::log(sd) - LN_SQRT_2PI
            }
            Distribution::Exponential { rate } => {
                if z < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    libm::log(rate) - rate * z
                }
            }
            Distribution::Gamma { shape, scale } => {
                if z < 0.0 {
                    f64::NEG_INFINITY
                } else if z == 0.0 {
                    libm::log(self.density(0.0))
                } else {
                    (shape - 1.0) * libm::log(z) - z / scale - ln_gamma(shape) - shape * libm::log(scale)
                }
            }
            Distribution::Uniform { .. } => libm::log(self.density(z)),
            Distribution::LogNormal { mu, sigma } => {
                if z <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let lz = libm::log(z);
                    let u = (lz - mu) / sigma;
                    -lz - libm::log(sigma) - LN_SQRT_2PI - 0.5 * u * u
                }
            }
        }
    }

    fn mgf_domain(&self) -> MgfDomain {
        match *self {
            Distribution::Normal { .. } | Distribution::Uniform { .. } => {
                MgfDomain { lower: f64::NEG_INFINITY, upper: f64::INFINITY }
            }
            Distribution::Exponential { rate } => MgfDomain { lower: f64::NEG_INFINITY, upper: rate },
            Distribution::Gamma { scale, .. } => MgfDomain { lower: f64::NEG_INFINITY, upper: 1.0 / scale },
            Distribution::LogNormal { .. } => MgfDomain { lower: f64::NEG_INFINITY, upper: 0.0 },
        }
    }

    fn closed_form_log_mgf(&self, t: f64) -> Option<f64> {
        if !self.mgf_domain().contains(t) {
            return None;
        }
        match *self {
            Distribution::Normal { mean, sd } => Some(mean * t + 0.5 * sd * sd * t * t),
            Distribution::Exponential { rate } => Some(libm::log(rate) - libm::log(rate - t)),
            Distribution::Gamma { shape, scale } => Some(-shape * libm::log1p(-scale * t)),
            Distribution::Uniform { lower, upper } => {
                // ln((e^{tb} - e^{ta}) / (t (b - a))) = t a + ln(expm1(w) / w), w = t (b - a)
                let w = t * (upper - lower);
                if w == 0.0 {
                    return Some(0.0);
                }
                let ln_ratio = if w > 30.0 {
                    w + libm::log1p(-libm::exp(-w)) - libm::log(w)
                } else {
                    libm::log(libm::expm1(w) / w)
                };
                Some(t * lower + ln_ratio)
            }
            Distribution::LogNormal { .. } => None,
        }
    }

    fn closed_form_tail(&self, x: f64) -> Option<f64> {
        let p = match *self {
            Distribution::Normal { mean, sd } => normal_sf((x - mean) / sd),
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    libm::exp(-rate * x)
                }
            }
            Distribution::Gamma { shape, scale } => gamma_q(shape, x / scale),
            Distribution::Uniform { lower, upper } => ((upper - x) / (upper - lower)).clamp(0.0, 1.0),
            Distribution::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    normal_sf((libm::log(x) - mu) / sigma)
                }
            }
        };
        Some(p)
    }

    fn moment_oracle(&self, n: u32) -> Option<f64> {
        let n_us = n as usize;
        let m = match *self {
            Distribution::Normal { mean, sd } => {
                // m_k = mean m_{k-1} + (k-1) sd^2 m_{k-2}
                let (mut prev, mut cur) = (1.0, mean);
                if n == 0 {
                    return Some(1.0);
                }
                for k in 2..=n_us {
                    let next = mean * cur + (k as f64 - 1.0) * sd * sd * prev;
                    prev = cur;
                    cur = next;
                }
                cur
            }
            Distribution::Exponential { rate } => factorial(n_us) / libm::pow(rate, n as f64),
            Distribution::Gamma { shape, scale } => (0..n_us).fold(1.0, |acc, i| acc * (shape + i as f64) * scale),
            Distribution::Uniform { lower, upper } => {
                let k = n as f64 + 1.0;
                (libm::pow(upper, k) - libm::pow(lower, k)) / (k * (upper - lower))
            }
            Distribution::LogNormal { mu, sigma } => {
                let k = n as f64;
                libm::exp(k * mu + 0.5 * k * k * sigma * sigma)
            }
        };
        Some(m)
    }

    fn center(&self) -> f64 {
        match *self {
            Distribution::Normal { mean, .. } => mean,
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Gamma { shape, scale } => shape * scale,
            Distribution::Uniform { lower, upper } => 0.5 * (lower + upper),
            Distribution::LogNormal { mu, .. } => libm::exp(mu),
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => mean.abs() + sd,
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Gamma { shape, scale } => scale * (shape + libm::sqrt(shape)),
            Distribution::Uniform { lower, upper } => lower.abs().max(upper.abs()),
            Distribution::LogNormal { mu, sigma } => libm::exp(mu) * (1.0 + sigma),
        }
    }
}

/// The positive part of a law conditioned on `Z > 0`:
/// density `p(z) / Pr[Z > 0]` for `z > 0`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRestriction<D> {
    base: D,
    mass: f64,
}

impl<D: ContinuousDistribution> PositiveRestriction<D> {
    pub fn base(&self) -> &D {
        &self.base
    }

    /// `Pr[Z > 0]` under the base law, as integrated.
    pub fn mass(&self) -> f64 {
        self.mass
    }
}

impl<D: ContinuousDistribution> ContinuousDistribution for PositiveRestriction<D> {
    fn name(&self) -> String {
        format!("{}|Z>0", self.base.name())
    }
    fn params(&self) -> Vec<f64> {
        self.base.params()
    }
    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        (lo.max(0.0), hi)
    }
    fn density(&self, z: f64) -> f64 {
        if z > 0.0 {
            self.base.density(z) / self.mass
        } else {
            0.0
        }
    }
    fn ln_density(&self, z: f64) -> f64 {
        if z > 0.0 {
            self.base.ln_density(z) - libm::log(self.mass)
        } else {
            f64::NEG_INFINITY
        }
    }
    fn mgf_domain(&self) -> MgfDomain {
        MgfDomain { lower: f64::NEG_INFINITY, upper: self.base.mgf_domain().upper }
    }
    fn closed_form_tail(&self, x: f64) -> Option<f64> {
        if x <= 0.0 {
            return Some(1.0);
        }
        self.base.closed_form_tail(x).map(|t| (t / self.mass).min(1.0))
    }
    fn center(&self) -> f64 {
        self.base.center().max(self.base.scale())
    }
    fn scale(&self) -> f64 {
        self.base.scale()
    }
}

/// A law whose density is multiplied by a constant factor, with every
/// closed form withheld. Used to inject normalization faults into
/// verification runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledDensity<D> {
    base: D,
    factor: f64,
}

impl<D: ContinuousDistribution> ScaledDensity<D> {
    pub fn new(base: D, factor: f64) -> Result<Self, Error> {
        Ok(ScaledDensity { base, factor: positive("factor", factor)? })
    }
}

impl<D: ContinuousDistribution> ContinuousDistribution for ScaledDensity<D> {
    fn name(&self) -> String {
        format!("{}*{}", self.base.name(), self.factor)
    }
    fn params(&self) -> Vec<f64> {
        let mut p = self.base.params();
        p.push(self.factor);
        p
    }
    fn support(&self) -> (f64, f64) {
        self.base.support()
    }
    fn density(&self, z: f64) -> f64 {
        self.base.density(z) * self.factor
    }
    fn ln_density(&self, z: f64) -> f64 {
        self.base.ln_density(z) + libm::log(self.factor)
    }
    fn mgf_domain(&self) -> MgfDomain {
        self.base.mgf_domain()
    }
    fn center(&self) -> f64 {
        self.base.center()
    }
    fn scale(&self) -> f64 {
        self.base.scale()
    }
}

// Integrates exp(g(y)) against the support of `d`, with g built from the log density.
fn integrate_law<D, G>(d: &D, lo: f64, hi: f64, growth: f64, g: G, tol: &Tolerance) -> Result<TailIntegral, Error>
where
    D: ContinuousDistribution + ?Sized,
    G: Fn(f64) -> f64,
{
    let width = d.scale() * (1.0 + growth);
    let center = d.center().clamp(lo.max(-f64::MAX), hi.min(f64::MAX));
    integrate_range_checked(&g, lo, hi, &[], center, width, tol)
}

/// Total mass `∫ p` over the support (should be 1).
pub fn total_mass<D: ContinuousDistribution + ?Sized>(d: &D, tol: &Tolerance) -> Result<QuadratureResult, Error> {
    let (lo, hi) = d.support();
    integrate(|y| d.density(y), lo, hi, tol)
}

/// `E[e^{tZ}]`; closed form when the law has one, quadrature otherwise.
/// Outside the MGF domain the value is [`Extended::Infinite`]; a quadrature
/// that fails its error target yields [`Extended::NotComputed`].
pub fn mgf<D: ContinuousDistribution + ?Sized>(d: &D, t: f64, tol: &Tolerance) -> Extended {
    if t == 0.0 {
        return Extended::Finite(1.0);
    }
    log_mgf(d, t, tol).exp()
}

/// `ln E[e^{tZ}]`, see [`mgf`].
pub fn log_mgf<D: ContinuousDistribution + ?Sized>(d: &D, t: f64, tol: &Tolerance) -> Extended {
    if t == 0.0 {
        return Extended::Finite(0.0);
    }
    if !d.mgf_domain().contains(t) {
        return Extended::Infinite;
    }
    if let Some(v) = d.closed_form_log_mgf(t) {
        return Extended::from_f64(v);
    }
    match mgf_by_quadrature(d, t, tol) {
        Ok(v) => v.ln(),
        Err(_) => Extended::NotComputed,
    }
}

/// `∫ e^{ty} p(y) dy` by quadrature alone, without consulting the MGF
/// domain; divergence is detected from the integral itself.
pub fn mgf_by_quadrature<D: ContinuousDistribution + ?Sized>(
    d: &D,
    t: f64,
    tol: &Tolerance,
) -> Result<Extended, Error> {
    let (lo, hi) = d.support();
    let integrand = |y: f64| libm::exp(t * y + d.ln_density(y));
    match integrate_law(d, lo, hi, t.abs() * d.scale(), integrand, tol)? {
        TailIntegral::Converged(r) => Ok(Extended::from_f64(r.require_converged()?.value)),
        TailIntegral::Diverged => Ok(Extended::Infinite),
    }
}

/// Raw moment `E[Z^n]`: the analytic value when the law provides one,
/// quadrature otherwise.
pub fn raw_moment<D: ContinuousDistribution + ?Sized>(d: &D, n: u32, tol: &Tolerance) -> Result<f64, Error> {
    if n == 0 {
        return Ok(1.0);
    }
    match d.moment_oracle(n) {
        Some(m) => Ok(m),
        None => raw_moment_by_quadrature(d, n, tol),
    }
}

/// `∫ y^n p(y) dy` by quadrature.
pub fn raw_moment_by_quadrature<D: ContinuousDistribution + ?Sized>(
    d: &D,
    n: u32,
    tol: &Tolerance,
) -> Result<f64, Error> {
    let (lo, hi) = d.support();
    let odd = n % 2 == 1;
    let k = n as f64;
    let integrand = |y: f64| {
        if y == 0.0 {
            return if n == 0 { d.density(0.0) } else { 0.0 };
        }
        let v = libm::exp(k * libm::log(y.abs()) + d.ln_density(y));
        if odd && y < 0.0 {
            -v
        } else {
            v
        }
    };
    match integrate_law(d, lo, hi, k, integrand, tol)? {
        TailIntegral::Converged(r) => Ok(r.require_converged()?.value),
        TailIntegral::Diverged => Err(Error::Diverged),
    }
}

/// Positive fractional moment `m_a+ = ∫_0^∞ y^a p(y) dy`.
///
/// Always computed by quadrature. A divergent tail gives
/// [`Extended::Infinite`]; a quadrature that misses its target is an
/// [`Error::NonConvergent`].
pub fn positive_fractional_moment<D: ContinuousDistribution + ?Sized>(
    d: &D,
    alpha: f64,
    tol: &Tolerance,
) -> Result<Extended, Error> {
    positive_moment_ratio(d, alpha, 1.0, tol)
}

/// `m_a+ / x^a = ∫_0^∞ (y/x)^a p(y) dy`, integrated in that form so that
/// large orders do not overflow.
pub fn positive_moment_ratio<D: ContinuousDistribution + ?Sized>(
    d: &D,
    alpha: f64,
    x: f64,
    tol: &Tolerance,
) -> Result<Extended, Error> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter { what: "alpha", value: alpha });
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter { what: "x", value: x });
    }
    let (lo, hi) = d.support();
    let lo = lo.max(0.0);
    if !(lo < hi) {
        return Ok(Extended::Finite(0.0));
    }
    let ln_x = libm::log(x);
    let integrand = |y: f64| {
        if alpha == 0.0 {
            d.density(y)
        } else if y <= 0.0 {
            0.0
        } else {
            libm::exp(alpha * (libm::log(y) - ln_x) + d.ln_density(y))
        }
    };
    match integrate_law(d, lo, hi, alpha, integrand, tol)? {
        TailIntegral::Converged(r) => Ok(Extended::from_f64(r.require_converged()?.value)),
        TailIntegral::Diverged => Ok(Extended::Infinite),
    }
}

/// `E[e^{a Z} u(Z)] / e^{a x} = ∫_0^∞ e^{a(y - x)} p(y) dy`.
///
/// The integrand is split at its mode, which moves away from the origin as
/// `a` grows and would otherwise fall between quadrature nodes.
pub fn positive_exponential_ratio<D: ContinuousDistribution + ?Sized>(
    d: &D,
    a: f64,
    x: f64,
    tol: &Tolerance,
) -> Result<Extended, Error> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter { what: "a", value: a });
    }
    if !x.is_finite() {
        return Err(Error::InvalidParameter { what: "x", value: x });
    }
    let (lo, hi) = d.support();
    let lo = lo.max(0.0);
    if !(lo < hi) {
        return Ok(Extended::Finite(0.0));
    }
    let exponent = |y: f64| a * (y - x) + d.ln_density(y);
    let interval =
        if hi.is_finite() { SearchInterval::bounded(lo, hi)? } else { SearchInterval::semi_infinite(lo, d.scale())? };
    let mode = minimize_scalar(|y| Extended::from_f64(-exponent(y)), interval, 1e-6).map(|m| m.argmin).unwrap_or(lo);
    let integrand = |y: f64| if y < lo { 0.0 } else { libm::exp(exponent(y)) };
    match integrate_range_checked(&integrand, lo, hi, &[mode], mode, d.scale(), tol)? {
        TailIntegral::Converged(r) => Ok(Extended::from_f64(r.require_converged()?.value)),
        TailIntegral::Diverged => Ok(Extended::Infinite),
    }
}

/// `Pr[Z >= x]`: the closed-form survival function when available,
/// otherwise quadrature of the density over `[x, ∞)`.
pub fn exact_upper_tail<D: ContinuousDistribution + ?Sized>(d: &D, x: f64, tol: &Tolerance) -> Result<f64, Error> {
    if x.is_nan() {
        return Err(Error::InvalidInput("threshold is NaN"));
    }
    let (lo, hi) = d.support();
    if x <= lo {
        return Ok(1.0);
    }
    if x >= hi {
        return Ok(0.0);
    }
    match d.closed_form_tail(x) {
        Some(p) => Ok(p.clamp(0.0, 1.0)),
        None => upper_tail_by_quadrature(d, x, tol),
    }
}

/// `∫_x^∞ p(y) dy` by quadrature.
pub fn upper_tail_by_quadrature<D: ContinuousDistribution + ?Sized>(
    d: &D,
    x: f64,
    tol: &Tolerance,
) -> Result<f64, Error> {
    let (lo, hi) = d.support();
    let a = x.max(lo);
    if !(a < hi) {
        return Ok(0.0);
    }
    let r = integrate(|y| d.density(y), a, hi, tol)?.require_converged()?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Conditions `d` on `Z > 0`. The conditioning mass is integrated, not
/// taken from a closed form; it must exceed `tol.abs_tol`.
pub fn restrict_positive<D: ContinuousDistribution>(d: D, tol: &Tolerance) -> Result<PositiveRestriction<D>, Error> {
    let (lo, hi) = d.support();
    let lo = lo.max(0.0);
    let mass = if lo < hi { integrate(|y| d.density(y), lo, hi, tol)?.require_converged()?.value } else { 0.0 };
    if !(mass > tol.abs_tol) {
        return Err(Error::ZeroMass { mass });
    }
    Ok(PositiveRestriction { base: d, mass: mass.min(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn catalog() -> Vec<Distribution> {
        vec![
            Distribution::standard_normal(),
            Distribution::normal(1.5, 2.0).unwrap(),
            Distribution::exponential(1.0).unwrap(),
            Distribution::exponential(2.5).unwrap(),
            Distribution::gamma(2.0, 1.0).unwrap(),
            Distribution::gamma(0.7, 2.0).unwrap(),
            Distribution::uniform(0.0, 1.0).unwrap(),
            Distribution::uniform(-1.0, 3.0).unwrap(),
            Distribution::lognormal(0.0, 1.0).unwrap(),
            Distribution::lognormal(0.5, 0.4).unwrap(),
        ]
    }

    #[test]
    fn density_examples() {
        let n = Distribution::standard_normal();
        assert_relative_eq!(n.density(0.0), 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-15);
        assert_eq!(Distribution::exponential(1.0).unwrap().density(-1.0), 0.0);
        assert_eq!(Distribution::uniform(0.0, 1.0).unwrap().density(0.5), 1.0);
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(Distribution::normal(0.0, 0.0).is_err());
        assert!(Distribution::exponential(-1.0).is_err());
        assert!(Distribution::uniform(1.0, 1.0).is_err());
        assert!(Distribution::gamma(2.0, f64::NAN).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in catalog() {
            let r = total_mass(&d, &tol()).unwrap();
            assert!(r.converged, "{}", d.name());
            assert!((r.value - 1.0).abs() < 1e-8, "{}: {}", d.name(), r.value);
        }
    }

    #[test]
    fn mgf_examples() {
        let n = Distribution::standard_normal();
        assert_relative_eq!(mgf(&n, 1.0, &tol()).finite().unwrap(), 0.5f64.exp(), max_relative = 1e-15);
        for d in catalog() {
            assert_eq!(mgf(&d, 0.0, &tol()), Extended::Finite(1.0));
        }
        let e = Distribution::exponential(1.0).unwrap();
        assert_relative_eq!(mgf(&e, 0.5, &tol()).finite().unwrap(), 2.0, max_relative = 1e-15);
        assert_eq!(mgf(&e, 1.5, &tol()), Extended::Infinite);
        // quadrature agrees on both sides of the domain edge
        assert_relative_eq!(mgf_by_quadrature(&e, 0.5, &tol()).unwrap().finite().unwrap(), 2.0, max_relative = 1e-8);
        assert_eq!(mgf_by_quadrature(&e, 1.5, &tol()).unwrap(), Extended::Infinite);
    }

    #[test]
    fn lognormal_mgf_only_finite_for_nonpositive_t() {
        let ln = Distribution::lognormal(0.0, 1.0).unwrap();
        assert!(!ln.mgf_domain().has_positive_part());
        assert_eq!(mgf(&ln, 0.1, &tol()), Extended::Infinite);
        assert_eq!(mgf_by_quadrature(&ln, 0.1, &tol()).unwrap(), Extended::Infinite);
        let v = mgf(&ln, -1.0, &tol()).finite().unwrap();
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn closed_form_mgf_matches_quadrature() {
        for d in catalog() {
            let dom = d.mgf_domain();
            for &t in &[-1.3, -0.4, 0.2, 0.45, 1.1, 2.0] {
                if !dom.contains(t) || d.closed_form_log_mgf(t).is_none() {
                    continue;
                }
                let closed = mgf(&d, t, &tol()).finite().unwrap();
                let quad = mgf_by_quadrature(&d, t, &tol()).unwrap().finite().unwrap();
                assert_relative_eq!(closed, quad, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn raw_moment_examples() {
        let n = Distribution::standard_normal();
        assert_eq!(raw_moment(&n, 2, &tol()).unwrap(), 1.0);
        let e = Distribution::exponential(1.0).unwrap();
        assert_eq!(raw_moment(&e, 3, &tol()).unwrap(), 6.0);
        assert_relative_eq!(raw_moment_by_quadrature(&e, 3, &tol()).unwrap(), 6.0, max_relative = 1e-8);
        for d in catalog() {
            assert_eq!(raw_moment(&d, 0, &tol()).unwrap(), 1.0);
        }
    }

    #[test]
    fn moment_oracles_agree_with_quadrature() {
        for d in catalog() {
            for n in 1..=6 {
                let oracle = d.moment_oracle(n).unwrap();
                let quad = raw_moment_by_quadrature(&d, n, &tol()).unwrap();
                assert!(
                    (oracle - quad).abs() <= 1e-8 * oracle.abs().max(1.0),
                    "{} n={n}: {oracle} vs {quad}",
                    d.name()
                );
            }
        }
    }

    #[test]
    fn fractional_moment_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        let n = Distribution::standard_normal();
        assert_relative_eq!(
            positive_fractional_moment(&e, 1.0, &tol()).unwrap().finite().unwrap(),
            1.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            positive_fractional_moment(&n, 0.0, &tol()).unwrap().finite().unwrap(),
            0.5,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            positive_fractional_moment(&e, 1.5, &tol()).unwrap().finite().unwrap(),
            1.329_340_388_179_137,
            max_relative = 1e-8
        );
        assert!(positive_fractional_moment(&e, -0.5, &tol()).is_err());
    }

    #[test]
    fn fractional_moment_against_closed_forms() {
        // half-normal: ∫_0^∞ y^a φ(y) dy = 2^{a/2} Γ((a+1)/2) / (2 sqrt(pi))
        let n = Distribution::standard_normal();
        for &a in &[0.3, 1.0, 2.7, 9.5, 40.0] {
            let expected = libm::exp(0.5 * a * core::f64::consts::LN_2 + ln_gamma(0.5 * (a + 1.0))) / (2.0 * PI.sqrt());
            let got = positive_fractional_moment(&n, a, &tol()).unwrap().finite().unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-8);
        }
        // lognormal: e^{a mu + a^2 sigma^2 / 2}
        let ln = Distribution::lognormal(0.0, 1.0).unwrap();
        for &a in &[0.5, 2.0, 6.0] {
            let got = positive_fractional_moment(&ln, a, &tol()).unwrap().finite().unwrap();
            assert_relative_eq!(got, libm::exp(0.5 * a * a), max_relative = 1e-8);
        }
        // exponential at large order: Γ(a+1)
        let e = Distribution::exponential(1.0).unwrap();
        let got = positive_fractional_moment(&e, 64.0, &tol()).unwrap().finite().unwrap();
        assert_relative_eq!(got, crate::special::gamma(65.0), max_relative = 1e-8);
    }

    #[test]
    fn tail_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        let n = Distribution::standard_normal();
        assert_relative_eq!(exact_upper_tail(&e, 2.0, &tol()).unwrap(), 0.135_335_283_236_612_7, max_relative = 1e-14);
        assert_eq!(exact_upper_tail(&n, 0.0, &tol()).unwrap(), 0.5);
        assert_relative_eq!(exact_upper_tail(&n, 1.0, &tol()).unwrap(), 0.158_655_253_931_457_05, max_relative = 1e-12);
        // independent fixed-grid oracle: composite Simpson on [1, 12]
        let steps = 20_000;
        let h = 11.0 / steps as f64;
        let mut s = 0.0;
        for i in 0..=steps {
            let y = 1.0 + i as f64 * h;
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * n.density(y);
        }
        assert_relative_eq!(upper_tail_by_quadrature(&n, 1.0, &tol()).unwrap(), s * h / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn tails_monotone_and_consistent() {
        for d in catalog() {
            let (lo, _) = d.support();
            if lo.is_finite() {
                assert_eq!(exact_upper_tail(&d, lo, &tol()).unwrap(), 1.0);
            }
            let mut prev = 1.0;
            for i in 0..40 {
                let x = -2.0 + 0.2 * i as f64;
                let t = exact_upper_tail(&d, x, &tol()).unwrap();
                assert!(t <= prev + 1e-15, "{} not monotone at {x}", d.name());
                prev = t;
                let q = upper_tail_by_quadrature(&d, x, &tol()).unwrap();
                assert!((t - q).abs() < 1e-9, "{} at {x}: {t} vs {q}", d.name());
            }
        }
    }

    #[test]
    fn restriction_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        let r = restrict_positive(&e, &tol()).unwrap();
        assert_relative_eq!(r.mass(), 1.0, max_relative = 1e-9);
        for &z in &[0.1, 1.0, 4.0] {
            assert_relative_eq!(r.density(z), e.density(z), max_relative = 1e-9);
        }

        let n = Distribution::standard_normal();
        let half = restrict_positive(&n, &tol()).unwrap();
        assert_relative_eq!(half.mass(), 0.5, max_relative = 1e-9);
        for &z in &[0.2, 1.0, 2.5] {
            assert_relative_eq!(half.density(z), 2.0 * n.density(z), max_relative = 1e-9);
        }
        assert_eq!(half.density(-1.0), 0.0);

        let u = Distribution::uniform(-1.0, 1.0).unwrap();
        let ru = restrict_positive(&u, &tol()).unwrap();
        assert_relative_eq!(ru.mass(), 0.5, max_relative = 1e-9);
        assert_relative_eq!(ru.density(0.5), 1.0, max_relative = 1e-9);
        assert_eq!(ru.support(), (0.0, 1.0));
    }

    #[test]
    fn restriction_normalizes_and_rescales_moments() {
        for d in catalog() {
            let r = restrict_positive(&d, &tol()).unwrap();
            let m = total_mass(&r, &tol()).unwrap();
            assert!((m.value - 1.0).abs() < 1e-8, "{}", d.name());
            for n in 1..=3 {
                let conditioned = raw_moment(&r, n, &tol()).unwrap();
                let plus = positive_fractional_moment(&d, n as f64, &tol()).unwrap().finite().unwrap();
                assert_relative_eq!(conditioned, plus / r.mass(), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn zero_mass_restriction_rejected() {
        let u = Distribution::uniform(-2.0, -1.0).unwrap();
        assert!(matches!(restrict_positive(&u, &tol()), Err(Error::ZeroMass { .. })));
    }

    #[test]
    fn scaled_density_breaks_normalization() {
        let s = ScaledDensity::new(Distribution::standard_normal(), 0.9).unwrap();
        assert_relative_eq!(total_mass(&s, &tol()).unwrap().value, 0.9, max_relative = 1e-9);
        assert!(s.closed_form_tail(1.0).is_none());
    }
}
