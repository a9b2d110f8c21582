//! Named reference mixtures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mixture::MixtureSpec;
use crate::weight::WeightFunction;

pub const NAMES: [&str; 6] = [
    "enm-qubit",
    "example1",
    "example2",
    "example3",
    "example4",
    "all-negative-witness",
];

#[derive(Debug, Clone, Serialize)]
pub struct FixtureInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub default_dim: usize,
}

pub fn catalogue() -> Vec<FixtureInfo> {
    vec![
        FixtureInfo {
            name: "enm-qubit",
            description: "qubit, x = (1/2, 1/2, 0), w = 2t; gamma = (1, 1, -tanh t)",
            default_dim: 2,
        },
        FixtureInfo {
            name: "example1",
            description: "x_a = 1/(d+1), w = rt; CP-divisible",
            default_dim: 3,
        },
        FixtureInfo {
            name: "example2",
            description: "x_a = 1/d, x_{d+1} = 0, w = rt; gamma_{d+1} eternally negative",
            default_dim: 3,
        },
        FixtureInfo {
            name: "example3",
            description: "x_1 = x_2 = 1/2, rest 0, w = rt; d-1 identical eternally negative rates",
            default_dim: 3,
        },
        FixtureInfo {
            name: "example4",
            description: "x_1..x_k = 0, rest 1/(d+1-k), w = rt; k eternally negative rates",
            default_dim: 3,
        },
        FixtureInfo {
            name: "all-negative-witness",
            description: "x_a = 1/(d+1), w = sin^2 t; all gamma < 0 where w decreases",
            default_dim: 3,
        },
    ]
}

/// Fixture parameters; `None` picks the defaults (`d` from the catalogue,
/// `r = d`, `k = 1`).
#[derive(Debug, Clone, Copy, Default)]
pub struct FixtureParams {
    pub dim: Option<usize>,
    pub rate: Option<f64>,
    pub k: Option<usize>,
}

/// Weight vector of the semigroup examples.
pub fn example_weights(which: usize, d: usize, k: usize) -> Result<Vec<f64>> {
    let df = d as f64;
    Ok(match which {
        1 => vec![1.0 / (df + 1.0); d + 1],
        2 => {
            let mut x = vec![1.0 / df; d + 1];
            x[d] = 0.0;
            x
        }
        3 => {
            let mut x = vec![0.0; d + 1];
            x[0] = 0.5;
            x[1] = 0.5;
            x
        }
        4 => {
            if k == 0 || k >= d {
                return Err(Error::InvalidK { k, max: d - 1 });
            }
            (0..=d)
                .map(|a| {
                    if a < k {
                        0.0
                    } else {
                        1.0 / (df + 1.0 - k as f64)
                    }
                })
                .collect()
        }
        _ => return Err(Error::UnknownFixture(format!("example{which}"))),
    })
}

pub fn fixture(name: &str, params: FixtureParams) -> Result<MixtureSpec> {
    let info = catalogue()
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownFixture(name.into()))?;
    let d = params.dim.unwrap_or(info.default_dim);
    let r = params.rate.unwrap_or(d as f64);
    match name {
        "enm-qubit" => {
            if d != 2 {
                return Err(Error::UnsupportedDimension(d));
            }
            let w = WeightFunction::linear(params.rate.unwrap_or(2.0))?;
            MixtureSpec::shared_weight(2, vec![0.5, 0.5, 0.0], w)
        }
        "all-negative-witness" => {
            let w = WeightFunction::sin_squared(1.0, 1.0)?;
            MixtureSpec::shared_weight(d, vec![1.0 / (d as f64 + 1.0); d + 1], w)
        }
        _ => {
            let which = name["example".len()..]
                .parse::<usize>()
                .expect("catalogue name");
            MixtureSpec::semigroup(d, example_weights(which, d, params.k.unwrap_or(1))?, r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_builds() {
        for name in NAMES {
            let spec = fixture(name, FixtureParams::default()).unwrap();
            assert!(spec.dim() >= 2);
        }
        assert_eq!(catalogue().len(), NAMES.len());
        assert!(fixture("nope", FixtureParams::default()).is_err());
    }

    #[test]
    fn parameters() {
        let p = FixtureParams {
            dim: Some(5),
            rate: Some(2.0),
            k: Some(4),
        };
        let spec = fixture("example4", p).unwrap();
        assert_eq!(spec.x()[..4], [0.0; 4]);
        assert_eq!(spec.common_rate(), Some(2.0));
        let bad = FixtureParams { k: Some(5), ..p };
        assert!(matches!(
            fixture("example4", bad),
            Err(Error::InvalidK { .. })
        ));
        assert!(fixture(
            "enm-qubit",
            FixtureParams {
                dim: Some(3),
                ..Default::default()
            }
        )
        .is_err());
        assert!(fixture(
            "example2",
            FixtureParams {
                dim: Some(4),
                ..Default::default()
            }
        )
        .is_err());
    }
}
