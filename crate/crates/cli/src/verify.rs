//! Seeded verification suite. Each property draws from its own ChaCha
//! stream so results do not depend on scheduling.

use std::fmt::Write as _;

use chernoff_core::bounds::{
    chernoff_bound, logistic_bound_sweep, markov_bound, moment_bound, moment_objective, operational_ratio,
    truncated_power_bound,
};
use chernoff_core::distributions::{
    exact_upper_tail, mgf, mgf_by_quadrature, positive_fractional_moment, restrict_positive, total_mass,
    upper_tail_by_quadrature, ScaledDensity,
};
use chernoff_core::operational::{
    apply_operator_series, cauchy_third_inequality, exponential_eigenfunction_residual, ordering_check,
    series_coefficients, DEFAULT_SAM_ORDER,
};
use chernoff_core::optimize::{minimize_scalar, SearchInterval, GRID_POINTS};
use chernoff_core::quadrature::{convolution_expectation, integrate};
use chernoff_core::{ContinuousDistribution, Distribution, Error, Extended, ShiftFunction, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{render, CliError, Format, Outcome};

pub const DEFAULT_CASES: usize = 32;

struct Ctx {
    tol: Tolerance,
    cases: usize,
    injected: Option<ScaledDensity<Distribution>>,
}

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    fn record(&mut self, r: Result<bool, Error>, what: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.check(ok, what),
            Err(e) => self.check(false, || format!("{}: {e}", what())),
        }
    }
}

type Property = fn(&mut ChaCha8Rng, &Ctx) -> Tally;

fn catalog() -> Vec<Distribution> {
    vec![
        Distribution::standard_normal(),
        Distribution::normal(0.5, 1.5).unwrap(),
        Distribution::exponential(1.0).unwrap(),
        Distribution::gamma(2.0, 1.0).unwrap(),
        Distribution::uniform(0.0, 1.0).unwrap(),
        Distribution::lognormal(0.0, 1.0).unwrap(),
    ]
}

fn shifts() -> Vec<ShiftFunction> {
    vec![
        ShiftFunction::exponential(0.5).unwrap(),
        ShiftFunction::step(),
        ShiftFunction::truncated_power(1.5).unwrap(),
        ShiftFunction::truncated_exponential(0.3).unwrap(),
        ShiftFunction::logistic(0.2).unwrap(),
    ]
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, v: &'a [T]) -> &'a T {
    &v[rng.random_range(0..v.len())]
}

fn density_normalization(_: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let mut laws: Vec<Box<dyn ContinuousDistribution + Sync>> =
        catalog().into_iter().map(|d| Box::new(d) as Box<dyn ContinuousDistribution + Sync>).collect();
    if let Some(bad) = &ctx.injected {
        laws.push(Box::new(bad.clone()));
    }
    for d in &laws {
        let r = total_mass(d.as_ref(), &ctx.tol).map(|m| (m.value - 1.0).abs() <= 1e-8);
        t.record(r, || match total_mass(d.as_ref(), &ctx.tol) {
            Ok(m) => format!("{}: mass {}", d.name(), m.value),
            Err(_) => d.name(),
        });
    }
    t
}

fn mgf_matches_quadrature(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = &catalog()[..5];
    for _ in 0..ctx.cases {
        let d = pick(rng, laws);
        let u = d.mgf_domain().upper;
        let s = if u.is_finite() { rng.random_range(-1.0..0.9 * u) } else { rng.random_range(-2.0..2.0) };
        let closed = mgf(d, s, &ctx.tol).finite().unwrap_or(f64::NAN);
        let r = mgf_by_quadrature(d, s, &ctx.tol)
            .map(|q| q.finite().is_some_and(|q| (q - closed).abs() <= 1e-8 * closed.abs()));
        t.record(r, || format!("{} t={s}: closed {closed}", d.name()));
    }
    t
}

fn fractional_moment_integer_agreement(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = catalog();
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let n: i32 = rng.random_range(1..6);
        let (lo, hi) = d.support();
        let r = positive_fractional_moment(d, n as f64, &ctx.tol).and_then(|m| {
            let direct = integrate(|y| y.powi(n) * d.density(y), lo.max(0.0), hi, &ctx.tol)?.value;
            Ok(m.finite().is_some_and(|m| (m - direct).abs() <= 1e-8 * direct.abs()))
        });
        t.record(r, || format!("{} n={n}", d.name()));
    }
    t
}

fn survival_consistent(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = catalog();
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let x = d.center() + d.scale() * rng.random_range(-3.0..5.0);
        let x2 = x + d.scale() * rng.random_range(0.0..2.0);
        let r = (|| {
            let a = exact_upper_tail(d, x, &ctx.tol)?;
            let b = exact_upper_tail(d, x2, &ctx.tol)?;
            let q = upper_tail_by_quadrature(d, x, &ctx.tol)?;
            Ok(b <= a + 1e-12 && (a - q).abs() <= 1e-8 && (0.0..=1.0).contains(&a))
        })();
        t.record(r, || format!("{} x={x} x2={x2}", d.name()));
    }
    t
}

fn positive_restriction_normalized(_: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    for d in catalog() {
        let name = d.name();
        let r = restrict_positive(d, &ctx.tol)
            .and_then(|p| total_mass(&p, &ctx.tol))
            .map(|m| (m.value - 1.0).abs() <= 1e-8);
        t.record(r, || name.clone());
    }
    t
}

fn operational_ratio_sound(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = catalog();
    let fs = shifts();
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let f = pick(rng, &fs);
        let x: f64 = rng.random_range(0.2..4.0);
        let z = x.max(1.0) * rng.random_range(-0.95..2.0);
        if f.eval(x + z) <= 0.0 {
            continue;
        }
        let r = (|| {
            let exact = exact_upper_tail(d, x, &ctx.tol)?;
            Ok(match operational_ratio(d, f, x, z, &ctx.tol)? {
                Extended::Finite(v) => v >= exact - 1e-6,
                Extended::Infinite => true,
                Extended::NotComputed => false,
            })
        })();
        t.record(r, || format!("{} {f} x={x} z={z}", d.name()));
    }
    t
}

fn exact_below_moment_below_chernoff(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = catalog();
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let x = rng.random_range(0.1..4.0);
        let r = (|| {
            let exact = exact_upper_tail(d, x, &ctx.tol)?;
            let moment = moment_bound(d, x, &ctx.tol)?.raw().unwrap_or(f64::NAN);
            let chernoff = chernoff_bound(d, x, &ctx.tol)?.raw();
            Ok(moment >= exact - 1e-6 && chernoff.is_none_or(|c| moment <= c + 1e-6))
        })();
        t.record(r, || format!("{} x={x}", d.name()));
    }
    t
}

fn exact_below_markov(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = catalog();
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let x = rng.random_range(0.1..4.0);
        let r = (|| {
            let exact = exact_upper_tail(d, x, &ctx.tol)?;
            Ok(markov_bound(d, x, &ctx.tol)?.raw().is_some_and(|m| m >= exact - 1e-6))
        })();
        t.record(r, || format!("{} x={x}", d.name()));
    }
    t
}

fn markov_is_moment_at_one(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws: Vec<Distribution> = catalog().into_iter().filter(|d| d.support().0 >= 0.0).collect();
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let x = rng.random_range(0.1..6.0);
        let r = (|| {
            let markov = markov_bound(d, x, &ctx.tol)?.raw().unwrap_or(f64::NAN);
            let objective = moment_objective(d, 1.0, x, &ctx.tol)?.finite().unwrap_or(f64::NAN);
            Ok((markov - objective).abs() <= 1e-9 * markov)
        })();
        t.record(r, || format!("{} x={x}", d.name()));
    }
    t
}

fn exponential_shift_flat_in_z(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = &catalog()[..5];
    for _ in 0..ctx.cases {
        let d = pick(rng, laws);
        let alpha = rng.random_range(0.05..0.9f64).min(0.9 * d.mgf_domain().upper);
        let x = rng.random_range(0.1..3.0);
        let z = rng.random_range(-2.0..5.0);
        let r = (|| {
            let f = ShiftFunction::exponential(alpha)?;
            let base = operational_ratio(d, &f, x, 0.0, &ctx.tol)?.finite().unwrap_or(f64::NAN);
            let v = operational_ratio(d, &f, x, z, &ctx.tol)?.finite().unwrap_or(f64::NAN);
            Ok((v - base).abs() <= 1e-8 * base)
        })();
        t.record(r, || format!("{} alpha={alpha} x={x} z={z}", d.name()));
    }
    t
}

const LOGISTIC_ALPHAS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

fn logistic_gaps(d: &Distribution, x: f64, tol: &Tolerance) -> Result<(Vec<f64>, f64), Error> {
    let exact = exact_upper_tail(d, x, tol)?;
    let rows = logistic_bound_sweep(d, x, &LOGISTIC_ALPHAS, tol)?;
    Ok((rows.iter().map(|r| (r.raw().unwrap_or(f64::NAN) - exact).abs()).collect(), exact))
}

fn logistic_cases() -> [(Distribution, f64); 2] {
    [(Distribution::standard_normal(), 1.0), (Distribution::exponential(1.0).unwrap(), 2.0)]
}

fn logistic_gaps_non_increasing(_: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    for (d, x) in logistic_cases() {
        let r = logistic_gaps(&d, x, &ctx.tol).map(|(g, _)| g.windows(2).all(|w| w[1] <= w[0]));
        t.record(r, || format!("{} x={x}", d.name()));
    }
    t
}

fn logistic_final_gap(_: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    for (d, x) in logistic_cases() {
        match logistic_gaps(&d, x, &ctx.tol) {
            Ok((g, exact)) => {
                let rel = g[g.len() - 1] / exact;
                t.check(rel < 0.05, || format!("{} x={x}: relative gap {rel} at alpha 0.05", d.name()));
            }
            Err(e) => t.check(false, || format!("{} x={x}: {e}", d.name())),
        }
    }
    t
}

fn truncated_power_equals_moment(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = [Distribution::exponential(1.0).unwrap(), Distribution::gamma(2.0, 1.0).unwrap()];
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let x = rng.random_range(1.0..3.0);
        let r = (|| {
            let p = truncated_power_bound(d, x, &ctx.tol)?.raw().unwrap_or(f64::NAN);
            let m = moment_bound(d, x, &ctx.tol)?.raw().unwrap_or(f64::NAN);
            Ok((p - m).abs() <= 1e-6 * m)
        })();
        t.record(r, || format!("{} x={x}", d.name()));
    }
    t
}

fn polynomial_series_exact(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = catalog();
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let coeffs: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let z = rng.random_range(-2.0..2.0);
        let r = (|| {
            let f = ShiftFunction::polynomial(coeffs.clone())?;
            let s = apply_operator_series(&series_coefficients(d, 8, &ctx.tol)?, &f, z)?;
            let q = convolution_expectation(d, &f, z, &ctx.tol)?.value;
            Ok((s.value - q).abs() <= 1e-8 * q.abs().max(1.0))
        })();
        t.record(r, || format!("{} coeffs={coeffs:?} z={z}", d.name()));
    }
    t
}

/// Relative residuals below this are rounding noise.
const RESIDUAL_FLOOR: f64 = 8.0 * f64::EPSILON;

fn eigen_residual_non_increasing(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = &catalog()[..5];
    for _ in 0..ctx.cases {
        let d = pick(rng, laws);
        let u = d.mgf_domain().upper;
        let frac = rng.random_range(0.05..0.6);
        let alpha = if u.is_finite() { frac * u } else { 2.0 * frac };
        let z = rng.random_range(-1.0..1.0);
        let r = [10, 20, 40]
            .iter()
            .map(|&n| exponential_eigenfunction_residual(d, alpha, z, n, &ctx.tol))
            .collect::<Result<Vec<_>, _>>()
            .map(|r| r[1] <= r[0].max(RESIDUAL_FLOOR) && r[2] <= r[1].max(RESIDUAL_FLOOR));
        t.record(r, || format!("{} alpha={alpha} z={z}", d.name()));
    }
    t
}

fn cauchy_third(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    for _ in 0..ctx.cases * 125 {
        let n = rng.random_range(1..=50);
        let a: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-6.0..6.0))).collect();
        let b: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-6.0..6.0))).collect();
        t.record(cauchy_third_inequality(&a, &b).map(|r| r.holds && r.r <= r.big_r), || format!("n={n}"));
    }
    t
}

fn moment_ordering(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = [
        Distribution::exponential(1.0).unwrap(),
        Distribution::gamma(2.0, 1.0).unwrap(),
        Distribution::standard_normal(),
    ];
    let fs = [ShiftFunction::exponential(0.5).unwrap(), ShiftFunction::exponential(1.0).unwrap()];
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let f = pick(rng, &fs);
        let x = rng.random_range(1.0..3.0);
        let z = -rng.random_range(0.0..2.0);
        let r = ordering_check(d, f, x, &[z], DEFAULT_SAM_ORDER, &ctx.tol).map(|r| r.passed);
        t.record(r, || format!("{} {f} x={x} z={z}", d.name()));
    }
    t
}

fn shift_functions_well_formed(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    for f in shifts() {
        t.check(f.nondecreasing(), || format!("{f} not nondecreasing"));
        let pts: Vec<f64> = (0..ctx.cases)
            .map(|_| {
                let w: f64 = rng.random_range(-3.0..3.0);
                if w.abs() < 0.05 {
                    0.5
                } else {
                    w
                }
            })
            .collect();
        let r = f.check_first_derivative(&pts);
        t.check(r.is_ok(), || format!("{f}: derivative mismatch {:?}", r.err()));
    }
    t
}

fn quadrature_split_invariant(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    for _ in 0..ctx.cases {
        let a = rng.random_range(-5.0..0.0);
        let b = a + rng.random_range(0.5..10.0);
        let c = a + rng.random_range(0.01..0.99) * (b - a);
        let w = rng.random_range(0.2..4.0);
        let f = |y: f64| (w * y).sin().powi(2) + (-y * y / 4.0).exp();
        let r = (|| {
            let whole = integrate(f, a, b, &ctx.tol)?;
            let left = integrate(f, a, c, &ctx.tol)?;
            let right = integrate(f, c, b, &ctx.tol)?;
            let slack = whole.error_estimate + left.error_estimate + right.error_estimate + 1e-13 * whole.value.abs();
            Ok((whole.value - (left.value + right.value)).abs() <= slack.max(1e-14))
        })();
        t.record(r, || format!("[{a}, {b}] split at {c}, w={w}"));
    }
    t
}

fn minimizer_beats_grid(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    for _ in 0..ctx.cases {
        let c = rng.random_range(-5.0..15.0);
        let k = rng.random_range(0.1..10.0);
        let g = |a: f64| k * (a - c) * (a - c) - (0.7 * a).sin();
        let r = minimize_scalar(|a| Extended::Finite(g(a)), SearchInterval::bounded(0.0, 10.0).unwrap(), 1e-9)
            .map(|m| (0..GRID_POINTS).all(|i| m.value <= g(10.0 * i as f64 / (GRID_POINTS - 1) as f64) + 1e-12));
        t.record(r, || format!("c={c} k={k}"));
    }
    t
}

const PROPERTIES: [(&str, Property); 21] = [
    ("density-normalization", density_normalization),
    ("mgf-matches-quadrature", mgf_matches_quadrature),
    ("fractional-moment-integer-agreement", fractional_moment_integer_agreement),
    ("survival-consistent", survival_consistent),
    ("positive-restriction-normalized", positive_restriction_normalized),
    ("operational-ratio-sound", operational_ratio_sound),
    ("exact-below-moment-below-chernoff", exact_below_moment_below_chernoff),
    ("exact-below-markov", exact_below_markov),
    ("markov-is-moment-at-one", markov_is_moment_at_one),
    ("exponential-shift-flat-in-z", exponential_shift_flat_in_z),
    ("logistic-gaps-non-increasing", logistic_gaps_non_increasing),
    ("logistic-final-gap-below-5pct", logistic_final_gap),
    ("truncated-power-equals-moment", truncated_power_equals_moment),
    ("polynomial-series-exact", polynomial_series_exact),
    ("eigenfunction-residual-non-increasing", eigen_residual_non_increasing),
    ("cauchy-third-inequality", cauchy_third),
    ("moment-ordering-check", moment_ordering),
    ("shift-functions-well-formed", shift_functions_well_formed),
    ("quadrature-split-invariant", quadrature_split_invariant),
    ("minimizer-beats-grid", minimizer_beats_grid),
    ("bounds-clamped-to-unit", bounds_clamped),
];

fn bounds_clamped(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Tally {
    let mut t = Tally::default();
    let laws = catalog();
    for _ in 0..ctx.cases {
        let d = pick(rng, &laws);
        let x = rng.random_range(0.05..3.0);
        let r = chernoff_core::bounds::compare_all(d, x, &ctx.tol)
            .map(|c| c.rows.iter().all(|r| (0.0..=1.0).contains(&r.bound_clamped)));
        t.record(r, || format!("{} x={x}", d.name()));
    }
    t
}

#[derive(Serialize)]
pub struct PropertyOut {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub pass: bool,
    pub first_failure: Option<String>,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases: usize,
    pub inject_density_scale: Option<f64>,
    pub passed: usize,
    pub failed: usize,
    pub properties: Vec<PropertyOut>,
}

pub fn verify_report(seed: u64, cases: usize, inject: Option<f64>, tol: &Tolerance) -> Result<VerifyReport, CliError> {
    if cases < 1 {
        return Err(CliError::Usage("cases must be at least 1".into()));
    }
    let injected = inject
        .map(|s| ScaledDensity::new(Distribution::standard_normal(), s))
        .transpose()
        .map_err(|e| CliError::Usage(format!("bad --inject-density-scale: {e}")))?;
    let ctx = Ctx { tol: *tol, cases, injected };
    let properties: Vec<PropertyOut> = PROPERTIES
        .par_iter()
        .enumerate()
        .map(|(i, (name, prop))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t = prop(&mut rng, &ctx);
            PropertyOut {
                name,
                cases: t.cases,
                failures: t.failures,
                pass: t.failures == 0,
                first_failure: t.first_failure,
            }
        })
        .collect();
    let passed = properties.iter().filter(|p| p.pass).count();
    Ok(VerifyReport {
        seed,
        cases,
        inject_density_scale: inject,
        passed,
        failed: properties.len() - passed,
        properties,
    })
}

pub fn run_verify(
    seed: u64,
    cases: usize,
    inject: Option<f64>,
    format: Format,
    tol: &Tolerance,
) -> Result<Outcome, CliError> {
    let r = verify_report(seed, cases, inject, tol)?;
    let report = match format {
        Format::Json => render::json(&r)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["property", "cases", "failures", "pass", "first_failure"])?;
            for p in &r.properties {
                w.write_record([
                    p.name.to_string(),
                    p.cases.to_string(),
                    p.failures.to_string(),
                    p.pass.to_string(),
                    p.first_failure.clone().unwrap_or_default(),
                ])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?).expect("utf-8")
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "seed: {}   cases per property: {}", r.seed, r.cases);
            if let Some(f) = r.inject_density_scale {
                let _ = writeln!(s, "injected: normal:0,1 with density scaled by {f}");
            }
            for p in &r.properties {
                let _ = write!(
                    s,
                    "[{}] {:<40} {:>5} cases {:>4} failed",
                    if p.pass { "PASS" } else { "FAIL" },
                    p.name,
                    p.cases,
                    p.failures
                );
                if let Some(f) = &p.first_failure {
                    let _ = write!(s, "   first: {f}");
                }
                s.push('\n');
            }
            let _ = writeln!(s, "verify: {} passed, {} failed", r.passed, r.failed);
            s
        }
    };
    let failure = (r.failed > 0).then(|| {
        let names: Vec<&str> = r.properties.iter().filter(|p| !p.pass).map(|p| p.name).collect();
        CliError::Violation(format!("properties failed: {}", names.join(", ")))
    });
    Ok(Outcome { report, failure })
}
