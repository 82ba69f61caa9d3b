//! Table, CSV and JSON rendering. Numbers are written as the shortest
//! decimal that round-trips to the same `f64`.

use std::fmt::Write as _;

use chernoff_core::{BoundReport, Comparison, Extended};
use serde::{Serialize, Serializer};

use crate::CliError;

/// CSV header for bound rows.
pub const CSV_COLUMNS: [&str; 8] =
    ["dist", "x", "method", "bound_raw", "bound_clamped", "argmin_alpha", "argmin_z", "status"];

fn ser_extended<S: Serializer>(v: &Extended, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Extended::Finite(x) => s.serialize_f64(*x),
        Extended::Infinite => s.serialize_str("inf"),
        Extended::NotComputed => s.serialize_none(),
    }
}

#[derive(Serialize)]
pub struct RowOut<'a> {
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<&'a str>,
    #[serde(serialize_with = "ser_extended")]
    pub bound_raw: Extended,
    pub bound_clamped: f64,
    pub argmin_alpha: Option<f64>,
    pub argmin_z: Option<f64>,
    pub status: &'static str,
    pub evaluations: usize,
}

impl<'a> From<&'a BoundReport> for RowOut<'a> {
    fn from(r: &'a BoundReport) -> Self {
        RowOut {
            method: r.method.as_str(),
            function: r.function.as_deref(),
            bound_raw: r.bound_raw,
            bound_clamped: r.bound_clamped,
            argmin_alpha: r.argmin_alpha,
            argmin_z: r.argmin_z,
            status: r.status.as_str(),
            evaluations: r.evaluations,
        }
    }
}

#[derive(Serialize)]
pub struct ComparisonOut<'a> {
    pub dist: &'a str,
    pub x: f64,
    pub ordering_ok: bool,
    pub rows: Vec<RowOut<'a>>,
}

impl<'a> From<&'a Comparison> for ComparisonOut<'a> {
    fn from(c: &'a Comparison) -> Self {
        ComparisonOut {
            dist: &c.dist,
            x: c.x,
            ordering_ok: c.ordering_ok,
            rows: c.rows.iter().map(RowOut::from).collect(),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn ext(v: Extended) -> String {
    match v {
        Extended::Finite(x) => num(x),
        Extended::Infinite => "inf".into(),
        Extended::NotComputed => String::new(),
    }
}

/// Fixed-width human-readable number.
pub fn short(v: f64) -> String {
    if v != 0.0 && v.is_finite() && (v.abs() < 1e-4 || v.abs() >= 1e6) {
        format!("{v:.6e}")
    } else {
        format!("{v:.6}")
    }
}

fn short_ext(v: Extended) -> String {
    match v {
        Extended::Finite(x) => short(x),
        Extended::Infinite => "inf".into(),
        Extended::NotComputed => "n/a".into(),
    }
}

fn short_opt(v: Option<f64>) -> String {
    v.map(short).unwrap_or_else(|| "-".into())
}

pub fn comparisons_csv(cs: &[Comparison]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for c in cs {
        for r in &c.rows {
            w.write_record([
                c.dist.clone(),
                num(c.x),
                r.method.as_str().to_string(),
                ext(r.bound_raw),
                num(r.bound_clamped),
                opt(r.argmin_alpha),
                opt(r.argmin_z),
                r.status.as_str().to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Shift functions are shown by family; their parameter is in `argmin_alpha`.
pub fn comparison_table(c: &Comparison) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dist: {}   x: {}", c.dist, c.x);
    let _ = writeln!(
        s,
        "{:<16} {:<16} {:>14} {:>14} {:>14} {:>14} {:<16}",
        "method", "function", "bound_raw", "bound_clamped", "argmin_alpha", "argmin_z", "status"
    );
    for r in &c.rows {
        let _ = writeln!(
            s,
            "{:<16} {:<16} {:>14} {:>14} {:>14} {:>14} {:<16}",
            r.method.as_str(),
            r.function.as_deref().map_or("-", |f| f.split(':').next().unwrap_or(f)),
            short_ext(r.bound_raw),
            short(r.bound_clamped),
            short_opt(r.argmin_alpha),
            short_opt(r.argmin_z),
            r.status.as_str()
        );
    }
    let _ = writeln!(s, "ordering_ok: {}", c.ordering_ok);
    s
}

pub fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chernoff_core::bounds::compare_all;
    use chernoff_core::{Distribution, Tolerance};

    #[test]
    fn shortest_round_trip_numbers() {
        for v in [0.1, 1.0 / 3.0, 0.135_335_283_236_612_7, 2e-300, 12345.678] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn csv_has_fixed_columns() {
        let c = compare_all(&Distribution::exponential(1.0).unwrap(), 2.0, &Tolerance::default()).unwrap();
        let out = comparisons_csv(std::slice::from_ref(&c)).unwrap();
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), "dist,x,method,bound_raw,bound_clamped,argmin_alpha,argmin_z,status");
        assert_eq!(lines.count(), c.rows.len());
    }

    #[test]
    fn json_marks_infinite_bounds() {
        let c = compare_all(&Distribution::lognormal(0.0, 1.0).unwrap(), 2.0, &Tolerance::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json(&ComparisonOut::from(&c)).unwrap()).unwrap();
        let chernoff = v["rows"].as_array().unwrap().iter().find(|r| r["method"] == "chernoff").unwrap();
        assert_eq!(chernoff["bound_raw"], "inf");
        assert_eq!(chernoff["status"], "mgf_domain_empty");
    }
}
