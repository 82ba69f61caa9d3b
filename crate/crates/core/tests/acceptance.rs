//! Acceptance criteria, each run at its pinned tolerance. Prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use chernoff_core::bounds::{
    chernoff_bound, heaviside_chernoff, logistic_bound_sweep, moment_bound, truncated_power_bound, BoundStatus,
};
use chernoff_core::distributions::exact_upper_tail;
use chernoff_core::operational::{
    apply_operator_series, cauchy_third_inequality, exponential_eigenfunction_residual, ordering_check,
    series_coefficients, SeriesStatus, DEFAULT_SAM_ORDER,
};
use chernoff_core::{ContinuousDistribution, Distribution, Error, ShiftFunction, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn gaussian_chernoff() -> Outcome {
    let d = Distribution::standard_normal();
    let mut worst: f64 = 0.0;
    for x in [0.5, 1.0, 2.0, 3.0] {
        let got = chernoff_bound(&d, x, &tol()).unwrap().raw().unwrap();
        worst = worst.max(rel(got, (-0.5 * x * x).exp()));
    }
    Outcome { pass: worst <= 1e-6, detail: format!("max rel err {worst:.3e} (limit 1e-6)") }
}

fn ordering_inequality() -> Outcome {
    let cases: [(Distribution, f64, f64); 4] = [
        (Distribution::standard_normal(), 0.25, 0.25),
        (Distribution::exponential(1.0).unwrap(), 0.5, 0.5),
        (Distribution::gamma(2.0, 1.0).unwrap(), 1.0, 0.5),
        (Distribution::uniform(0.0, 1.0).unwrap(), 0.5, 0.04),
    ];
    let mut failures = Vec::new();
    let mut checked = 0;
    for (d, start, step) in cases {
        for i in 0..12 {
            let x = start + step * i as f64;
            let exact = exact_upper_tail(&d, x, &tol()).unwrap();
            let moment = moment_bound(&d, x, &tol()).unwrap().raw().unwrap();
            let chernoff = chernoff_bound(&d, x, &tol()).unwrap().raw().unwrap();
            checked += 1;
            if exact > moment + 1e-6 || moment > chernoff + 1e-6 {
                failures.push(format!("{} x={x}: {exact} / {moment} / {chernoff}", d.name()));
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("{checked} (d, x) pairs, {} violations {:?}", failures.len(), failures),
    }
}

fn heaviside_exactness() -> Outcome {
    let e = Distribution::exponential(1.0).unwrap();
    let u = Distribution::uniform(0.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let x = -0.25 + 0.3 * i as f64;
        let got = heaviside_chernoff(&e, x, &tol()).unwrap().raw().unwrap();
        let want = if x <= 0.0 { 1.0 } else { (-x).exp() };
        worst = worst.max((got - want).abs());
        let xu = -0.1 + 0.065 * i as f64;
        let got = heaviside_chernoff(&u, xu, &tol()).unwrap().raw().unwrap();
        let want = (1.0 - xu).clamp(0.0, 1.0);
        worst = worst.max((got - want).abs());
    }
    Outcome { pass: worst <= 1e-9, detail: format!("max abs err {worst:.3e} over 40 points (limit 1e-9)") }
}

fn logistic_convergence() -> Outcome {
    let alphas = [0.4, 0.2, 0.1, 0.05];
    let cases = [(Distribution::standard_normal(), 1.0), (Distribution::exponential(1.0).unwrap(), 2.0)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, x) in cases {
        let exact = exact_upper_tail(&d, x, &tol()).unwrap();
        let rows = logistic_bound_sweep(&d, x, &alphas, &tol()).unwrap();
        let gaps: Vec<f64> = rows.iter().map(|r| (r.raw().unwrap() - exact).abs()).collect();
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
        let final_rel = gaps[gaps.len() - 1] / exact;
        pass &= monotone && final_rel < 0.05;
        parts.push(format!(
            "{} x={x}: gaps {:?} non-increasing={monotone}, final rel gap {:.4} (limit 0.05)",
            d.name(),
            gaps.iter().map(|g| format!("{g:.5}")).collect::<Vec<_>>(),
            final_rel
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn moment_reduction() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [Distribution::exponential(1.0).unwrap(), Distribution::gamma(2.0, 1.0).unwrap()] {
        for x in [1.5, 2.0, 3.0] {
            let power = truncated_power_bound(&d, x, &tol()).unwrap().raw().unwrap();
            let moment = moment_bound(&d, x, &tol()).unwrap().raw().unwrap();
            worst = worst.max(rel(power, moment));
        }
    }
    Outcome { pass: worst <= 1e-6, detail: format!("max rel diff {worst:.3e} (limit 1e-6)") }
}

fn eigenfunction_identity() -> Outcome {
    let d = Distribution::standard_normal();
    let mut worst: f64 = 0.0;
    for a in [0.25, 0.5, 1.0] {
        for z in [-1.0, 0.0, 0.3] {
            worst = worst.max(exponential_eigenfunction_residual(&d, a, z, 40, &tol()).unwrap());
        }
    }
    Outcome { pass: worst < 1e-8, detail: format!("max residual {worst:.3e} at N=40 (limit 1e-8)") }
}

fn cauchy_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut held = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        let a: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-6.0..6.0))).collect();
        let b: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-6.0..6.0))).collect();
        if cauchy_third_inequality(&a, &b).unwrap().holds {
            held += 1;
        }
    }
    Outcome { pass: held == 1000, detail: format!("{held}/1000 random pairs hold") }
}

fn ordering_suite() -> Outcome {
    let dists = [
        Distribution::exponential(1.0).unwrap(),
        Distribution::gamma(2.0, 1.0).unwrap(),
        Distribution::standard_normal(),
    ];
    let fs = [ShiftFunction::exponential(0.5).unwrap(), ShiftFunction::exponential(1.0).unwrap()];
    let mut checks = 0;
    let mut divergent = 0;
    let mut failures = Vec::new();
    for d in &dists {
        for f in &fs {
            for x in [1.0, 2.0, 3.0] {
                let r = ordering_check(d, f, x, &[-2.0, -1.0, 0.0], DEFAULT_SAM_ORDER, &tol()).unwrap();
                for p in &r.points {
                    checks += 1;
                    if p.chain.a.is_infinite() {
                        divergent += 1;
                    }
                    if !(p.series_ok && p.chain_ok) {
                        failures.push(format!("{} {f} x={x} z={}", d.name(), p.z));
                    }
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{checks} (d, f, x, z) cases, {divergent} with divergent convolutions, failures {:?}",
            failures
        ),
    }
}

fn degenerate_paths() -> Outcome {
    let ln = Distribution::lognormal(0.0, 1.0).unwrap();
    let c = chernoff_bound(&ln, 2.0, &tol()).unwrap();
    let m = moment_bound(&ln, 2.0, &tol()).unwrap();
    let domain_empty = c.status == BoundStatus::MgfDomainEmpty && c.bound_clamped == 1.0;
    let moment_finite = m.raw().is_some_and(|v| v.is_finite() && v < 1.0);

    let e = Distribution::exponential(1.0).unwrap();
    let rejects = [0.0, -1.0].iter().all(|&x| matches!(moment_bound(&e, x, &tol()), Err(Error::InvalidInput(_))));

    let series = series_coefficients(&e, 40, &tol()).unwrap();
    let applied = apply_operator_series(&series, &ShiftFunction::exponential(1.0).unwrap(), 0.0).unwrap();
    let flagged = applied.status == SeriesStatus::Diverging;

    Outcome {
        pass: domain_empty && moment_finite && rejects && flagged,
        detail: format!(
            "lognormal chernoff {} / moment {}; x<=0 rejected={rejects}; exp series status {:?}",
            c.status, m.bound_raw, applied.status
        ),
    }
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 gaussian chernoff closed form", gaussian_chernoff, Duration::from_secs(1)),
        ("2 moment <= chernoff ordering", ordering_inequality, Duration::from_secs(30)),
        ("3 heaviside-chernoff exactness", heaviside_exactness, Duration::from_secs(1)),
        ("4 logistic convergence", logistic_convergence, Duration::from_secs(30)),
        ("5 truncated power = moment bound", moment_reduction, Duration::from_secs(10)),
        ("6 exponential eigenfunction", eigenfunction_identity, Duration::from_secs(1)),
        ("7 cauchy third inequality", cauchy_inequality, Duration::from_secs(1)),
        ("8 moment-ordering suite", ordering_suite, Duration::from_secs(60)),
        ("9 degenerate paths", degenerate_paths, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        let timing = if elapsed <= budget { "" } else { " (over runtime budget)" };
        println!("[{verdict}] {name}: {} [{:.2?} / {:?}{timing}]", outcome.detail, elapsed, budget);
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
