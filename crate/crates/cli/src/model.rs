//! Parsing of model, weight and grid flags.

use clap::Args;
use gpc_core::fixtures::{fixture, FixtureParams};
use gpc_core::{Error, MixtureSpec, TimeGrid, WeightFunction};

use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Named fixture (see `gpc fixtures`)
    #[arg(long)]
    pub fixture: Option<String>,
    /// Dimension d (prime)
    #[arg(long)]
    pub d: Option<usize>,
    /// Rate r of the semigroups exp(r t L_a); defaults to d
    #[arg(long)]
    pub r: Option<f64>,
    /// Mixing weights x_1..x_{d+1}, comma separated; fractions like 1/3 allowed
    #[arg(long)]
    pub x: Option<String>,
    /// Shared weight function: linear:r | pwl:t0,w0;t1,w1;... | sin2:A,omega
    #[arg(long)]
    pub weights: Option<String>,
    /// Number of zero weights for the example4 fixture
    #[arg(long)]
    pub k: Option<usize>,
}

impl ModelArgs {
    pub fn build(&self) -> Result<MixtureSpec, CliError> {
        if let Some(name) = &self.fixture {
            if self.x.is_some() || self.weights.is_some() {
                return Err(CliError::validation(
                    "--fixture",
                    "cannot be combined with --x or --weights",
                ));
            }
            let params = FixtureParams {
                dim: self.d,
                rate: self.r,
                k: self.k,
            };
            return fixture(name, params).map_err(|e| CliError::validation("--fixture", e));
        }
        let d = self
            .d
            .ok_or_else(|| CliError::validation("--d", "required without --fixture"))?;
        let x = match &self.x {
            Some(s) => parse_vector(s).map_err(|e| CliError::validation("--x", e))?,
            None => return Err(CliError::validation("--x", "required without --fixture")),
        };
        let w = match &self.weights {
            Some(s) => parse_weight(s).map_err(|e| CliError::validation("--weights", e))?,
            None => WeightFunction::linear(self.r.unwrap_or(d as f64))
                .map_err(|e| CliError::validation("--r", e))?,
        };
        MixtureSpec::shared_weight(d, x, w).map_err(|e| {
            let field = match e {
                Error::DimensionTooSmall(_) | Error::NonPrimeDimension(_) => "--d",
                Error::InvalidWeight(_) => "--weights",
                _ => "--x",
            };
            CliError::validation(field, e)
        })
    }
}

pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("bad number '{s}'"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_number).collect()
}

pub fn parse_weight(s: &str) -> Result<WeightFunction, String> {
    let (kind, body) = s
        .split_once(':')
        .ok_or_else(|| format!("expected kind:params, got '{s}'"))?;
    match kind {
        "linear" => WeightFunction::linear(parse_number(body)?).map_err(|e| e.to_string()),
        "pwl" => {
            let knots = body
                .split(';')
                .map(|pair| {
                    let v = parse_vector(pair)?;
                    match v[..] {
                        [t, w] => Ok((t, w)),
                        _ => Err(format!("knot '{pair}' must be t,w")),
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            WeightFunction::piecewise_linear(knots).map_err(|e| e.to_string())
        }
        "sin2" => match parse_vector(body)?[..] {
            [a, omega] => WeightFunction::sin_squared(a, omega).map_err(|e| e.to_string()),
            _ => Err("sin2 takes A,omega".into()),
        },
        _ => Err(format!("unknown weight kind '{kind}' (linear, pwl, sin2)")),
    }
}

/// `start:stop:points[:log|:lin]`.
pub fn parse_grid(s: &str) -> Result<TimeGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let (start, stop, n, log) = match parts[..] {
        [a, b, n] => (a, b, n, false),
        [a, b, n, "log"] => (a, b, n, true),
        [a, b, n, "lin"] => (a, b, n, false),
        _ => return Err(format!("expected start:stop:points[:log], got '{s}'")),
    };
    let start = parse_number(start)?;
    let stop = parse_number(stop)?;
    let n: usize = n.parse().map_err(|_| format!("bad point count '{n}'"))?;
    if stop <= start && n > 1 {
        return Err("stop must exceed start".into());
    }
    let grid = if log {
        TimeGrid::log(start, stop, n)
    } else {
        TimeGrid::linear(start, stop, n)
    };
    grid.map_err(|e| e.to_string())
}
