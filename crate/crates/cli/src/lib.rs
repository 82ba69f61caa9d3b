//! Command-line frontend for `chernoff-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use chernoff_core::bounds::compare_all;
use chernoff_core::operational::{apply_operator_series, sam_check, series_coefficients, SeriesStatus};
use chernoff_core::quadrature::convolution_expectation;
use chernoff_core::{BoundStatus, Comparison, Extended, Tolerance};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

pub mod grammar;
pub mod render;
pub mod verify;

pub use grammar::{parse_distribution, parse_shift};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Violation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

impl From<chernoff_core::Error> for CliError {
    fn from(e: chernoff_core::Error) -> Self {
        use chernoff_core::Error as E;
        match e {
            E::NonConvergent { .. } | E::Diverged => CliError::NonConvergence(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "chernoff", version, about = "Chernoff, moment and operational tail bounds")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    #[arg(long, env = "CHERNOFF_ABS_TOL", global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, env = "CHERNOFF_REL_TOL", global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, env = "CHERNOFF_MAX_SUBDIVISIONS", global = true)]
    pub max_subdivisions: Option<usize>,
}

impl TolArgs {
    pub fn tolerance(&self) -> Result<Tolerance, CliError> {
        let d = Tolerance::default();
        Tolerance::new(
            self.abs_tol.unwrap_or(d.abs_tol),
            self.rel_tol.unwrap_or(d.rel_tol),
            self.max_subdivisions.unwrap_or(d.max_subdivisions),
        )
        .map_err(|e| CliError::Usage(format!("bad tolerance override: {e}")))
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Every bound at one threshold.
    Bounds {
        #[arg(long)]
        dist: String,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Every bound over an evenly spaced grid of thresholds.
    Sweep {
        #[arg(long)]
        dist: String,
        #[arg(long, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Seeded randomized verification of the bound and operator invariants.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random cases per property.
        #[arg(long, default_value_t = verify::DEFAULT_CASES)]
        cases: usize,
        /// Adds a normal(0,1) whose density is multiplied by this factor.
        #[arg(long)]
        inject_density_scale: Option<f64>,
    },
    /// Strict absolute monotonicity of a shift function at given points.
    SamCheck {
        #[arg(long = "f")]
        f: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        points: Vec<f64>,
        #[arg(long, default_value_t = chernoff_core::operational::DEFAULT_SAM_ORDER)]
        order: usize,
    },
    /// Truncated operator series applied to a shift function at one point.
    Series {
        #[arg(long)]
        dist: String,
        #[arg(long = "f")]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 40)]
        order: usize,
    },
}

/// Rendered report plus the error that decides the exit code, if any.
pub struct Outcome {
    pub report: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(report: String) -> Self {
        Outcome { report, failure: None }
    }
}

fn check_x(x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("threshold must be positive and finite, got {x}")))
    }
}

fn comparison_verdict(cs: &[Comparison]) -> Option<CliError> {
    let bad: Vec<String> = cs.iter().filter(|c| !c.ordering_ok).map(|c| format!("x={}", c.x)).collect();
    if !bad.is_empty() {
        return Some(CliError::Violation(format!("bound ordering violated at {}", bad.join(", "))));
    }
    let stuck: Vec<String> = cs
        .iter()
        .flat_map(|c| c.rows.iter().map(move |r| (c.x, r)))
        .filter(|(_, r)| r.status == BoundStatus::NonConvergent)
        .map(|(x, r)| format!("{} at x={x}", r.method.as_str()))
        .collect();
    if !stuck.is_empty() {
        return Some(CliError::NonConvergence(format!("non-convergent: {}", stuck.join(", "))));
    }
    None
}

fn render_comparisons(cs: &[Comparison], format: Format, single: bool) -> Result<String, CliError> {
    match format {
        Format::Table => Ok(cs.iter().map(render::comparison_table).collect::<Vec<_>>().join("\n")),
        Format::Csv => render::comparisons_csv(cs),
        Format::Json if single => render::json(&render::ComparisonOut::from(&cs[0])),
        Format::Json => render::json(&cs.iter().map(render::ComparisonOut::from).collect::<Vec<_>>()),
    }
}

pub fn run_bounds(dist: &str, x: f64, format: Format, tol: &Tolerance) -> Result<Outcome, CliError> {
    let d = parse_distribution(dist)?;
    check_x(x)?;
    let c = compare_all(&d, x, tol)?;
    let cs = [c];
    Ok(Outcome { report: render_comparisons(&cs, format, true)?, failure: comparison_verdict(&cs) })
}

/// Grid `start + i (stop - start) / (steps - 1)`; one step is `start` alone.
pub fn sweep_grid(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 1 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    if !(start < stop) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Usage(format!("need finite start < stop, got {start} and {stop}")));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (stop - start) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { stop } else { start + h * i as f64 }).collect())
}

pub fn run_sweep(
    dist: &str,
    start: f64,
    stop: f64,
    steps: usize,
    format: Format,
    tol: &Tolerance,
) -> Result<Outcome, CliError> {
    let d = parse_distribution(dist)?;
    let xs = sweep_grid(start, stop, steps)?;
    for &x in &xs {
        check_x(x)?;
    }
    let cs = xs.par_iter().map(|&x| compare_all(&d, x, tol)).collect::<Result<Vec<_>, _>>()?;
    Ok(Outcome { report: render_comparisons(&cs, format, false)?, failure: comparison_verdict(&cs) })
}

#[derive(Serialize)]
struct SamOut {
    function: String,
    is_sam: bool,
    orders_checked: usize,
    points: Vec<f64>,
    violation_order: Option<usize>,
    violation_at: Option<f64>,
    violation_value: Option<f64>,
}

pub fn run_sam_check(f: &str, points: &[f64], order: usize, format: Format) -> Result<Outcome, CliError> {
    let f = parse_shift(f)?;
    if points.iter().any(|p| !p.is_finite()) {
        return Err(CliError::Usage("points must be finite".into()));
    }
    let r = sam_check(&f, points, order)?;
    let out = SamOut {
        function: f.name(),
        is_sam: r.is_sam,
        orders_checked: r.orders_checked,
        points: r.points_checked,
        violation_order: r.first_violation.map(|v| v.order),
        violation_at: r.first_violation.map(|v| v.at),
        violation_value: r.first_violation.map(|v| v.value),
    };
    let report = match format {
        Format::Json => render::json(&out)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "function",
                "is_sam",
                "orders_checked",
                "violation_order",
                "violation_at",
                "violation_value",
            ])?;
            w.write_record([
                out.function.clone(),
                out.is_sam.to_string(),
                out.orders_checked.to_string(),
                out.violation_order.map(|v| v.to_string()).unwrap_or_default(),
                out.violation_at.map(|v| v.to_string()).unwrap_or_default(),
                out.violation_value.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
            String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?).expect("utf-8")
        }
        Format::Table => {
            let pts: Vec<String> = out.points.iter().map(|p| p.to_string()).collect();
            let mut s = format!(
                "function: {}\npoints: {}\norders checked: 0..={}\nis_sam: {}\n",
                out.function,
                pts.join(", "),
                out.orders_checked,
                out.is_sam
            );
            if let Some(v) = r.first_violation {
                s.push_str(&format!(
                    "first violation: order {} at {} (value {})\n",
                    v.order,
                    v.at,
                    render::short(v.value)
                ));
            }
            s
        }
    };
    Ok(Outcome::ok(report))
}

fn status_str(s: SeriesStatus) -> &'static str {
    match s {
        SeriesStatus::Converged => "converged",
        SeriesStatus::Diverging => "diverging",
        SeriesStatus::Inconclusive => "inconclusive",
    }
}

#[derive(Serialize)]
struct SeriesOut {
    dist: String,
    function: String,
    z: f64,
    order: usize,
    value: f64,
    status: &'static str,
    #[serde(serialize_with = "ser_ext")]
    quadrature: Extended,
    partial_sums: Vec<f64>,
}

fn ser_ext<S: serde::Serializer>(v: &Extended, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Extended::Finite(x) => s.serialize_f64(*x),
        Extended::Infinite => s.serialize_str("inf"),
        Extended::NotComputed => s.serialize_none(),
    }
}

pub fn run_series(
    dist: &str,
    f: &str,
    z: f64,
    order: usize,
    format: Format,
    tol: &Tolerance,
) -> Result<Outcome, CliError> {
    let d = parse_distribution(dist)?;
    let f = parse_shift(f)?;
    if !z.is_finite() {
        return Err(CliError::Usage("z must be finite".into()));
    }
    let series = series_coefficients(&d, order, tol)?;
    let applied = apply_operator_series(&series, &f, z)?;
    let quadrature = match convolution_expectation(&d, &f, z, tol) {
        Ok(q) => Extended::Finite(q.value),
        Err(chernoff_core::Error::Diverged) => Extended::Infinite,
        Err(_) => Extended::NotComputed,
    };
    let out = SeriesOut {
        dist: d.to_string(),
        function: f.name(),
        z,
        order,
        value: applied.value,
        status: status_str(applied.status),
        quadrature,
        partial_sums: applied.partial_sums,
    };
    let report = match format {
        Format::Json => render::json(&out)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "partial_sum"])?;
            for (n, s) in out.partial_sums.iter().enumerate() {
                w.write_record([n.to_string(), s.to_string()])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?).expect("utf-8")
        }
        Format::Table => {
            let q = match out.quadrature {
                Extended::Finite(v) => render::short(v),
                Extended::Infinite => "inf".into(),
                Extended::NotComputed => "n/a".into(),
            };
            let mut s = format!(
                "dist: {}   function: {}   z: {}   order: {}\nseries value: {}\nstatus: {}\nquadrature: {}\n{:>4} {:>16}\n",
                out.dist,
                out.function,
                out.z,
                out.order,
                render::short(out.value),
                out.status,
                q,
                "n",
                "partial_sum"
            );
            for (n, p) in out.partial_sums.iter().enumerate() {
                s.push_str(&format!("{n:>4} {:>16}\n", render::short(*p)));
            }
            s
        }
    };
    let failure = (applied.status == SeriesStatus::Diverging).then(|| {
        CliError::NonConvergence(format!("operator series for {} on {} is diverging", out.function, out.dist))
    });
    Ok(Outcome { report, failure })
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tol.tolerance()?;
    match &cfg.command {
        Command::Bounds { dist, x } => run_bounds(dist, *x, cfg.format, &tol),
        Command::Sweep { dist, start, stop, steps } => run_sweep(dist, *start, *stop, *steps, cfg.format, &tol),
        Command::Verify { seed, cases, inject_density_scale } => {
            verify::run_verify(*seed, *cases, *inject_density_scale, cfg.format, &tol)
        }
        Command::SamCheck { f, points, order } => run_sam_check(f, points, *order, cfg.format),
        Command::Series { dist, f, z, order } => run_series(dist, f, *z, *order, cfg.format, &tol),
    }
}

fn emit(report: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, report)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(report.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = emit(&outcome.report, cfg.out.as_ref()) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match outcome.failure {
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        None => 0,
    }
}
