//! One-dimensional minimization: a coarse seed grid followed by Brent's
//! golden-section/parabolic refinement around the best grid point.

use alloc::vec::Vec;

use crate::extended::Extended;
use crate::Error;

/// Points in the seed grid.
pub const GRID_POINTS: usize = 64;
/// Default absolute tolerance on the argmin.
pub const DEFAULT_ARGMIN_TOL: f64 = 1e-9;

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const MAX_BRENT_ITERATIONS: usize = 200;
// Geometric offsets for semi-infinite domains, relative to the domain's unit.
const FIRST_OFFSET: f64 = 1e-6;
const LAST_OFFSET: f64 = 1e4;
const MAX_EXTENSIONS: usize = 8;

/// Where to search. Both bounded endpoints are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchInterval {
    Bounded {
        lo: f64,
        hi: f64,
    },
    /// `[lo, inf)`; the grid is geometric in `x - lo` with unit `unit`.
    SemiInfinite {
        lo: f64,
        unit: f64,
    },
}

impl SearchInterval {
    pub fn bounded(lo: f64, hi: f64) -> Result<Self, Error> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput("search interval needs finite lo < hi"));
        }
        Ok(SearchInterval::Bounded { lo, hi })
    }

    pub fn semi_infinite(lo: f64, unit: f64) -> Result<Self, Error> {
        if !lo.is_finite() || !(unit > 0.0) || !unit.is_finite() {
            return Err(Error::InvalidInput("semi-infinite interval needs finite lo and positive unit"));
        }
        Ok(SearchInterval::SemiInfinite { lo, unit })
    }

    fn grid(&self) -> Vec<f64> {
        match *self {
            SearchInterval::Bounded { lo, hi } => (0..GRID_POINTS)
                .map(|i| if i + 1 == GRID_POINTS { hi } else { lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64 })
                .collect(),
            SearchInterval::SemiInfinite { lo, unit } => {
                let mut g = Vec::with_capacity(GRID_POINTS);
                g.push(lo);
                g.extend(geometric(FIRST_OFFSET, LAST_OFFSET, GRID_POINTS - 1).map(|o| lo + unit * o));
                g
            }
        }
    }
}

fn geometric(first: f64, last: f64, n: usize) -> impl Iterator<Item = f64> {
    let ratio = libm::pow(last / first, 1.0 / (n - 1) as f64);
    (0..n).map(move |i| first * libm::pow(ratio, i as f64))
}

/// Outcome of [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub argmin: f64,
    pub value: f64,
    pub evaluations: usize,
    /// The minimum lies strictly inside a grid bracket whose endpoints are
    /// no lower than it.
    pub bracketed: bool,
    /// The best grid point is a domain endpoint.
    pub domain_clipped: bool,
}

struct Counted<G> {
    g: G,
    evaluations: usize,
}

impl<G: FnMut(f64) -> Extended> Counted<G> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.g)(x).objective()
    }
}

/// Minimizes `g` over `domain`, to within `tol` in the argument.
///
/// Non-finite values of `g` rank above every finite value. Fails with
/// [`Error::NoFiniteValue`] when every grid point is non-finite.
pub fn minimize_scalar<G: FnMut(f64) -> Extended>(
    g: G,
    domain: SearchInterval,
    tol: f64,
) -> Result<ScalarMinimum, Error> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { what: "tol", value: tol });
    }
    let mut g = Counted { g, evaluations: 0 };
    let mut xs = domain.grid();
    let mut fs: Vec<f64> = xs.iter().map(|&x| g.eval(x)).collect();

    if let SearchInterval::SemiInfinite { lo, unit } = domain {
        // Keep extending while the minimum sits on the last grid point.
        let mut last_offset = LAST_OFFSET;
        for _ in 0..MAX_EXTENSIONS {
            if argmin_index(&fs) != Some(fs.len() - 1) {
                break;
            }
            let next = last_offset * 1e4;
            for o in geometric(last_offset, next, 17).skip(1) {
                let x = lo + unit * o;
                xs.push(x);
                fs.push(g.eval(x));
            }
            last_offset = next;
        }
    }

    let best = argmin_index(&fs).ok_or(Error::NoFiniteValue)?;
    let last = xs.len() - 1;
    let domain_clipped = best == 0 || best == last;
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(last)];

    let (mut x_min, mut f_min) = (xs[best], fs[best]);
    if a < b {
        let (bx, bf) = brent(&mut g, a, xs[best], fs[best], b, tol);
        if bf < f_min {
            x_min = bx;
            f_min = bf;
        }
    }
    let bracketed = best > 0 && best < last && f_min <= fs[best - 1] && f_min <= fs[best + 1];
    Ok(ScalarMinimum { argmin: x_min, value: f_min, evaluations: g.evaluations, bracketed, domain_clipped })
}

fn argmin_index(fs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &f) in fs.iter().enumerate() {
        if f < f64::INFINITY && best.is_none_or(|b| f < fs[b]) {
            best = Some(i);
        }
    }
    best
}

// Brent's method on [a, b] starting from x with known value fx.
fn brent<G: FnMut(f64) -> Extended>(
    g: &mut Counted<G>,
    mut a: f64,
    x0: f64,
    fx0: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (fx0, fx0, fx0);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..MAX_BRENT_ITERATIONS {
        let xm = 0.5 * (a + b);
        let tol1 = 0.5 * tol + f64::EPSILON * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = g.eval(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fin(v: f64) -> Extended {
        Extended::Finite(v)
    }

    #[test]
    fn gaussian_chernoff_exponent() {
        let m = minimize_scalar(|a| fin(-a + 0.5 * a * a), SearchInterval::bounded(0.0, 10.0).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(m.argmin, 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(m.value, -0.5, epsilon = 1e-14);
        assert!(m.bracketed && !m.domain_clipped);
    }

    #[test]
    fn parabola_vertex() {
        let m =
            minimize_scalar(|a| fin((a - 2.0) * (a - 2.0)), SearchInterval::bounded(0.0, 10.0).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(m.argmin, 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(m.value, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn exponential_chernoff_exponent() {
        let g = |t: f64| fin(-2.0 * t - (1.0 - t).ln());
        let m = minimize_scalar(g, SearchInterval::bounded(1e-9, 1.0 - 1e-9).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(m.argmin, 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(m.value, -1.0 + core::f64::consts::LN_2, epsilon = 1e-13);
    }

    #[test]
    fn monotone_objective_is_clipped() {
        let m = minimize_scalar(fin, SearchInterval::bounded(-3.0, 4.0).unwrap(), 1e-9).unwrap();
        assert!(m.domain_clipped);
        assert_eq!(m.argmin, -3.0);
        let m = minimize_scalar(|x| fin(-x), SearchInterval::semi_infinite(0.0, 1.0).unwrap(), 1e-9).unwrap();
        assert!(m.domain_clipped);
    }

    #[test]
    fn semi_infinite_finds_far_minimum() {
        let m = minimize_scalar(|x| fin((x - 300.0).powi(2)), SearchInterval::semi_infinite(0.0, 1.0).unwrap(), 1e-9)
            .unwrap();
        assert_abs_diff_eq!(m.argmin, 300.0, epsilon = 1e-6);
    }

    #[test]
    fn infinite_values_rank_last() {
        let g = |x: f64| if x > 5.0 { Extended::Infinite } else { fin((x - 1.0).powi(2)) };
        let m = minimize_scalar(g, SearchInterval::bounded(0.0, 10.0).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(m.argmin, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn all_infinite_is_an_error() {
        let r = minimize_scalar(|_| Extended::Infinite, SearchInterval::bounded(0.0, 1.0).unwrap(), 1e-9);
        assert_eq!(r, Err(Error::NoFiniteValue));
    }
}
