//! `name:p1,p2` argument strings for distributions and shift functions.

use chernoff_core::{Distribution, ShiftFunction};

use crate::CliError;

const DIST_GRAMMAR: &str =
    "valid distributions: normal:mean,sd | exp:rate | gamma:shape,scale | uniform:lower,upper | lognormal:mu,sigma";
const SHIFT_GRAMMAR: &str = "valid functions: exp:alpha | step | power:alpha | trunc-exp:alpha | logistic:alpha";

fn split(spec: &str) -> Result<(&str, Vec<f64>), String> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (spec.trim(), ""),
    };
    let params = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok((name, params))
}

fn arity(spec: &str, params: &[f64], n: usize, grammar: &str) -> Result<(), CliError> {
    if params.len() == n {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "'{spec}' takes {n} parameter{}, got {}; {grammar}",
            if n == 1 { "" } else { "s" },
            params.len()
        )))
    }
}

pub fn parse_distribution(spec: &str) -> Result<Distribution, CliError> {
    let (name, p) =
        split(spec).map_err(|e| CliError::Usage(format!("bad distribution '{spec}': {e}; {DIST_GRAMMAR}")))?;
    let d = match name {
        "normal" => {
            arity(spec, &p, 2, DIST_GRAMMAR)?;
            Distribution::normal(p[0], p[1])
        }
        "exp" => {
            arity(spec, &p, 1, DIST_GRAMMAR)?;
            Distribution::exponential(p[0])
        }
        "gamma" => {
            arity(spec, &p, 2, DIST_GRAMMAR)?;
            Distribution::gamma(p[0], p[1])
        }
        "uniform" => {
            arity(spec, &p, 2, DIST_GRAMMAR)?;
            Distribution::uniform(p[0], p[1])
        }
        "lognormal" => {
            arity(spec, &p, 2, DIST_GRAMMAR)?;
            Distribution::lognormal(p[0], p[1])
        }
        other => return Err(CliError::Usage(format!("unknown distribution '{other}'; {DIST_GRAMMAR}"))),
    };
    d.map_err(|e| CliError::Usage(format!("bad distribution '{spec}': {e}")))
}

pub fn parse_shift(spec: &str) -> Result<ShiftFunction, CliError> {
    let (name, p) = split(spec).map_err(|e| CliError::Usage(format!("bad function '{spec}': {e}; {SHIFT_GRAMMAR}")))?;
    let f = match name {
        "step" => {
            arity(spec, &p, 0, SHIFT_GRAMMAR)?;
            Ok(ShiftFunction::step())
        }
        "exp" => {
            arity(spec, &p, 1, SHIFT_GRAMMAR)?;
            ShiftFunction::exponential(p[0])
        }
        "power" => {
            arity(spec, &p, 1, SHIFT_GRAMMAR)?;
            ShiftFunction::truncated_power(p[0])
        }
        "trunc-exp" => {
            arity(spec, &p, 1, SHIFT_GRAMMAR)?;
            ShiftFunction::truncated_exponential(p[0])
        }
        "logistic" => {
            arity(spec, &p, 1, SHIFT_GRAMMAR)?;
            ShiftFunction::logistic(p[0])
        }
        other => return Err(CliError::Usage(format!("unknown function '{other}'; {SHIFT_GRAMMAR}"))),
    };
    f.map_err(|e| CliError::Usage(format!("bad function '{spec}': {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chernoff_core::ContinuousDistribution;

    #[test]
    fn parses_catalog() {
        assert_eq!(parse_distribution("normal:0,1").unwrap(), Distribution::standard_normal());
        assert_eq!(parse_distribution("exp:1").unwrap(), Distribution::exponential(1.0).unwrap());
        assert_eq!(parse_distribution(" gamma: 2, 1 ").unwrap().params(), vec![2.0, 1.0]);
        assert_eq!(parse_distribution("uniform:0,1").unwrap().support(), (0.0, 1.0));
        assert!(parse_distribution("lognormal:0,1").is_ok());
    }

    #[test]
    fn errors_list_the_grammar() {
        for bad in ["cauchy:0,1", "exp:1,2", "normal:0", "exp:x", "exp:-1"] {
            let msg = parse_distribution(bad).unwrap_err().to_string();
            assert!(msg.contains(bad.split(':').next().unwrap().trim()), "{msg}");
            if bad != "exp:-1" {
                assert!(msg.contains("exp:rate") && msg.contains("lognormal:mu,sigma"), "{msg}");
            }
        }
    }

    #[test]
    fn parses_shift_functions() {
        assert_eq!(parse_shift("step").unwrap(), ShiftFunction::step());
        assert_eq!(parse_shift("exp:0.5").unwrap(), ShiftFunction::exponential(0.5).unwrap());
        assert_eq!(parse_shift("power:2").unwrap().name(), "power:2");
        assert_eq!(parse_shift("trunc-exp:1").unwrap().name(), "trunc-exp:1");
        assert_eq!(parse_shift("logistic:0.1").unwrap().name(), "logistic:0.1");
        assert!(parse_shift("logistic:0").is_err());
        assert!(parse_shift("step:1").unwrap_err().to_string().contains("trunc-exp:alpha"));
        assert!(parse_shift("sin").is_err());
    }
}
