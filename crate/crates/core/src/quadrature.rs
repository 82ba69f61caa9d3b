//! Adaptive Gauss–Kronrod integration on finite, semi-infinite and doubly
//! infinite intervals, and the convolution expectation `E[f(z + Z)]`.
//!
//! Infinite endpoints are removed by a fixed change of variables before the
//! adaptive bisection runs:
//!
//! * `(-inf, inf)`: `y = t / (1 - t^2)`, `t` in `(-1, 1)`;
//! * `[a, inf)`:   `y = a + t / (1 - t)`, `t` in `[0, 1)`;
//! * `(-inf, b]`:  `y = b - t / (1 - t)`, `t` in `[0, 1)`.
//!
//! Integrals whose convergence is itself in question (moments, MGFs,
//! convolutions with growing shift functions) go through
//! [`integrate_tail_checked`] instead, which integrates over nested
//! truncations `[a, a + h 2^k]` and watches the increments.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::distributions::ContinuousDistribution;
use crate::shift::ShiftFunction;
use crate::Error;

/// Error targets for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 2000 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self, Error> {
        if !(abs_tol > 0.0 && abs_tol < 1.0) {
            return Err(Error::InvalidParameter { what: "abs_tol", value: abs_tol });
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidParameter { what: "rel_tol", value: rel_tol });
        }
        if max_subdivisions < 1 {
            return Err(Error::InvalidInput("max_subdivisions must be at least 1"));
        }
        Ok(Tolerance { abs_tol, rel_tol, max_subdivisions })
    }

    /// Same budget with both error targets scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Tolerance {
        Tolerance {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            max_subdivisions: self.max_subdivisions,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl QuadratureResult {
    fn zero() -> Self {
        QuadratureResult { value: 0.0, error_estimate: 0.0, converged: true, evaluations: 0 }
    }

    fn merge(self, other: QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            converged: self.converged && other.converged,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    /// Converts an unconverged result into [`Error::NonConvergent`].
    pub fn require_converged(self) -> Result<QuadratureResult, Error> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergent { value: self.value, error_estimate: self.error_estimate })
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = libm::pow(200.0 * err / res_asc, 1.5);
        err = res_asc * scale.min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

fn adaptive_finite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: &Tolerance) -> QuadratureResult {
    let (value, error) = gauss_kronrod_15(f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total_value = value;
    let mut total_error = error;

    let mut subdivisions = 0;
    while total_error > tol.target(total_value) && subdivisions < tol.max_subdivisions {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval at floating-point resolution; nothing left to gain.
            heap.push(seg);
            break;
        }
        let (lv, le) = gauss_kronrod_15(f, seg.a, mid);
        let (rv, re) = gauss_kronrod_15(f, mid, seg.b);
        evaluations += 30;
        subdivisions += 1;
        total_value += lv + rv - seg.value;
        total_error += le + re - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: seg.b, value: rv, error: re });
    }

    // Resum to shed the drift of the running totals.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    QuadratureResult {
        value,
        error_estimate: error,
        converged: value.is_finite() && error <= tol.target(value),
        evaluations,
    }
}

/// Integrates `f` over `(a, b)`; either endpoint may be infinite.
///
/// A result that misses its error target is still returned, with
/// `converged = false`. Errors are reserved for malformed intervals.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<QuadratureResult, Error> {
    if a.is_nan() || b.is_nan() || !(a < b) {
        return Err(Error::InvalidInput("integration interval must satisfy a < b"));
    }
    let result = match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive_finite(&f, a, b, tol),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            };
            adaptive_finite(&g, 0.0, 1.0, tol)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(b - t / s) / (s * s)
            };
            adaptive_finite(&g, 0.0, 1.0, tol)
        }
        (false, false) => {
            let g = |t: f64| {
                let s = 1.0 - t * t;
                f(t / s) * (1.0 + t * t) / (s * s)
            };
            adaptive_finite(&g, -1.0, 1.0, tol)
        }
    };
    Ok(result)
}

/// Direction of a semi-infinite range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailDirection {
    /// `[a, inf)`
    Up,
    /// `(-inf, a]`
    Down,
}

/// Result of an integral whose finiteness is not known in advance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailIntegral {
    Converged(QuadratureResult),
    Diverged,
}

/// Consecutive non-decaying doublings after which a tail is declared divergent.
pub const DIVERGENCE_DOUBLINGS: usize = 6;
const MAX_DOUBLINGS: usize = 200;
// A doubling counts as non-decaying when its increment did not shrink and the
// increment ratio shrank by less than this factor.
const RATIO_SHRINK: f64 = 0.99;

/// Integrates `f` over `[a, inf)` (or `(-inf, a]`) through nested
/// truncations `T_k = a ± h 2^k`.
///
/// The tail is accepted once the increments decay geometrically and the
/// geometric remainder estimate falls under the error target. It is declared
/// divergent when [`DIVERGENCE_DOUBLINGS`] consecutive doublings fail to
/// decay (increment not smaller than the previous one, with a ratio that is
/// not shrinking), or when the running total overflows.
pub fn integrate_tail_checked<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    direction: TailDirection,
    initial_width: f64,
    tol: &Tolerance,
) -> Result<TailIntegral, Error> {
    if !a.is_finite() || !(initial_width > 0.0) || !initial_width.is_finite() {
        return Err(Error::InvalidInput("tail integration needs a finite start and positive width"));
    }
    let sign = match direction {
        TailDirection::Up => 1.0,
        TailDirection::Down => -1.0,
    };
    // Integrate s -> f(a + sign s) over s in [lo, hi].
    let piece_tol = Tolerance { abs_tol: tol.abs_tol * 0.1, rel_tol: tol.rel_tol * 0.5, ..*tol };
    let piece = |lo: f64, hi: f64| integrate(|s| f(a + sign * s), lo, hi, &piece_tol);

    let mut total = piece(0.0, initial_width)?;
    let mut prev_increment = total.value.abs();
    let mut prev_ratio: Option<f64> = None;
    let mut non_decaying = 0;
    let mut lo = initial_width;
    for _ in 0..MAX_DOUBLINGS {
        let hi = 2.0 * lo;
        let step = piece(lo, hi)?;
        total = total.merge(step);
        if !total.value.is_finite() {
            return Ok(TailIntegral::Diverged);
        }
        let increment = step.value.abs();
        let ratio = if prev_increment > 0.0 {
            increment / prev_increment
        } else if increment == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let stalled = ratio >= 1.0 && prev_ratio.is_none_or(|p| ratio >= RATIO_SHRINK * p);
        non_decaying = if stalled { non_decaying + 1 } else { 0 };
        if non_decaying >= DIVERGENCE_DOUBLINGS {
            return Ok(TailIntegral::Diverged);
        }
        if ratio < 1.0 {
            let remainder = if ratio == 0.0 { 0.0 } else { increment * ratio / (1.0 - ratio) };
            if remainder <= 0.5 * tol.target(total.value) {
                total.error_estimate += remainder;
                total.converged = total.converged && total.error_estimate <= tol.target(total.value);
                return Ok(TailIntegral::Converged(total));
            }
        }
        prev_increment = increment;
        prev_ratio = Some(ratio);
        lo = hi;
    }
    total.converged = false;
    Ok(TailIntegral::Converged(total))
}

/// Extra passes allowed when pieces that partly cancel miss the target of
/// their sum.
const REFINEMENTS: usize = 3;

/// Integrates over `[lo, hi]` (either end may be infinite), splitting at the
/// given interior breakpoints and using checked tails on unbounded pieces.
/// `center` is the split point when both ends are infinite and no breakpoint
/// lies inside.
///
/// Each piece meets a target relative to itself, which can be too loose for
/// the total when pieces cancel. The whole range is then redone with the
/// tolerance tightened by the observed shortfall.
pub(crate) fn integrate_range_checked<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    center: f64,
    width: f64,
    tol: &Tolerance,
) -> Result<TailIntegral, Error> {
    let mut inner = *tol;
    for round in 0..=REFINEMENTS {
        let TailIntegral::Converged(mut total) = range_pass(f, lo, hi, breakpoints, center, width, &inner)? else {
            return Ok(TailIntegral::Diverged);
        };
        let target = tol.target(total.value);
        let within = total.error_estimate <= target;
        let floor = 4.0 * f64::EPSILON;
        if within || round == REFINEMENTS || inner.rel_tol <= floor {
            // later rounds are judged against the caller's target, not the tightened one
            total.converged = within && (round > 0 || total.converged);
            return Ok(TailIntegral::Converged(total));
        }
        let shrink = (0.5 * target / total.error_estimate).clamp(1e-4, 0.5);
        inner = Tolerance {
            abs_tol: (inner.abs_tol * shrink).max(f64::MIN_POSITIVE),
            rel_tol: (inner.rel_tol * shrink).max(floor),
            ..inner
        };
    }
    unreachable!("the final round always returns")
}

fn range_pass<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    center: f64,
    width: f64,
    tol: &Tolerance,
) -> Result<TailIntegral, Error> {
    if !(lo < hi) {
        return Ok(TailIntegral::Converged(QuadratureResult::zero()));
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&c| c > lo && c < hi).collect();
    if cuts.is_empty() && !lo.is_finite() && !hi.is_finite() {
        cuts.push(center);
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    cuts.dedup();

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut total = QuadratureResult::zero();
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let part = match (a.is_finite(), b.is_finite()) {
            (true, true) => integrate(f, a, b, tol)?,
            (true, false) => match integrate_tail_checked(f, a, TailDirection::Up, width, tol)? {
                TailIntegral::Converged(r) => r,
                TailIntegral::Diverged => return Ok(TailIntegral::Diverged),
            },
            (false, true) => match integrate_tail_checked(f, b, TailDirection::Down, width, tol)? {
                TailIntegral::Converged(r) => r,
                TailIntegral::Diverged => return Ok(TailIntegral::Diverged),
            },
            (false, false) => unreachable!("doubly infinite ranges are split above"),
        };
        total = total.merge(part);
    }
    Ok(TailIntegral::Converged(total))
}

/// `E[f(z + Z)] = ∫ f(z + y) p(y) dy`, the operator `P(-q)` applied to `f`
/// at `z`.
///
/// The range is clipped to the density's support and to `f`'s support
/// cutoff, and split at `f`'s breakpoint so no rule straddles a jump.
/// Returns [`Error::Diverged`] when `f` outgrows the density's decay and
/// [`Error::NonConvergent`] when quadrature misses its error target.
pub fn convolution_expectation<D: ContinuousDistribution + ?Sized>(
    d: &D,
    f: &ShiftFunction,
    z: f64,
    tol: &Tolerance,
) -> Result<QuadratureResult, Error> {
    convolution_over(d, f, z, f64::NEG_INFINITY, tol)
}

/// Convolution restricted to `y >= y_min`: `∫_{y_min}^∞ f(z + y) p(y) dy`.
pub fn convolution_over<D: ContinuousDistribution + ?Sized>(
    d: &D,
    f: &ShiftFunction,
    z: f64,
    y_min: f64,
    tol: &Tolerance,
) -> Result<QuadratureResult, Error> {
    if !z.is_finite() {
        return Err(Error::InvalidInput("shift point must be finite"));
    }
    let (mut lo, hi) = d.support();
    lo = lo.max(y_min);
    if let Some(cut) = f.support_cutoff() {
        lo = lo.max(cut - z);
    }
    if !(lo < hi) {
        return Ok(QuadratureResult::zero());
    }
    let mut breaks = Vec::new();
    if let Some(bp) = f.breakpoint() {
        breaks.push(bp - z);
    }
    let integrand = |y: f64| {
        let p = d.density(y);
        if p == 0.0 {
            0.0
        } else {
            f.eval(z + y) * p
        }
    };
    let center = d.center().clamp(lo.max(-f64::MAX), hi.min(f64::MAX));
    let width = d.scale() * (1.0 + f.growth_hint());
    match integrate_range_checked(&integrand, lo, hi, &breaks, center, width, tol)? {
        TailIntegral::Converged(r) => r.require_converged(),
        TailIntegral::Diverged => Err(Error::Diverged),
    }
}
