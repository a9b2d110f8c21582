//! Weight functions `w(t)` entering `exp(w(t) L_α)`.
//!
//! Every weight satisfies `w(0) = 0` and `w(t) ≥ 0`. Piecewise-linear and
//! sampled weights use the right-hand derivative at knots and are held
//! constant after the last knot.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum WeightFunction {
    /// `w(t) = rate · t`.
    Linear { rate: f64 },
    /// Linear interpolation through `(t_i, w_i)` knots starting at `(0, 0)`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// Values on the uniform grid `t_i = i · step`, linearly interpolated.
    Sampled { step: f64, values: Vec<f64> },
    /// Closed-form weight with its derivative.
    Smooth {
        label: String,
        value: ScalarFn,
        derivative: ScalarFn,
    },
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { rate } => write!(f, "Linear({rate})"),
            Self::PiecewiseLinear { knots } => write!(f, "PiecewiseLinear({knots:?})"),
            Self::Sampled { step, values } => {
                write!(f, "Sampled(step={step}, n={})", values.len())
            }
            Self::Smooth { label, .. } => write!(f, "Smooth({label})"),
        }
    }
}

impl WeightFunction {
    pub fn linear(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "rate must be > 0, got {rate}"
            )));
        }
        Ok(Self::Linear { rate })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        match knots.first() {
            Some(&(t0, w0)) if t0 == 0.0 && w0 == 0.0 => {}
            _ => return Err(Error::InvalidWeight("first knot must be (0, 0)".into())),
        }
        for pair in knots.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::InvalidWeight(
                    "knot times must be strictly increasing".into(),
                ));
            }
        }
        if let Some(&(t, w)) = knots.iter().find(|(_, w)| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidWeight(format!("w({t}) = {w} is negative")));
        }
        Ok(Self::PiecewiseLinear { knots })
    }

    pub fn sampled(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "step must be > 0, got {step}"
            )));
        }
        if values.len() < 2 || values[0] != 0.0 {
            return Err(Error::InvalidWeight(
                "need at least two samples starting with w(0) = 0".into(),
            ));
        }
        if let Some(w) = values.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidWeight(format!("sample {w} is negative")));
        }
        Ok(Self::Sampled { step, values })
    }

    /// Arbitrary closed form. Call [`WeightFunction::validate_on`] to check
    /// `w(0) = 0` and `w ≥ 0` on a grid of interest.
    pub fn smooth(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Smooth {
            label: label.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    /// `w(t) = amplitude · sin²(freq · t)`; nonnegative, not monotone.
    pub fn sin_squared(amplitude: f64, freq: f64) -> Result<Self> {
        if !(amplitude > 0.0 && freq > 0.0) {
            return Err(Error::InvalidWeight(
                "sin² weight needs positive amplitude and frequency".into(),
            ));
        }
        Ok(Self::smooth(
            format!("{amplitude}*sin^2({freq}*t)"),
            move |t| amplitude * (freq * t).sin().powi(2),
            move |t| amplitude * freq * (2.0 * freq * t).sin(),
        ))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Linear { rate } => rate * t,
            Self::PiecewiseLinear { knots } => {
                let i = segment(knots.iter().map(|k| k.0), knots.len(), t);
                if i + 1 >= knots.len() {
                    knots[knots.len() - 1].1
                } else {
                    let (t0, w0) = knots[i];
                    let (t1, w1) = knots[i + 1];
                    w0 + (w1 - w0) * (t - t0) / (t1 - t0)
                }
            }
            Self::Sampled { step, values } => {
                let pos = t / step;
                let i = pos.floor() as usize;
                if i + 1 >= values.len() {
                    values[values.len() - 1]
                } else {
                    let frac = pos - i as f64;
                    values[i] + (values[i + 1] - values[i]) * frac
                }
            }
            Self::Smooth { value, .. } => value(t),
        }
    }

    /// `ẇ(t)`; right-hand derivative at knots.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Self::Linear { rate } => *rate,
            Self::PiecewiseLinear { knots } => {
                let i = segment(knots.iter().map(|k| k.0), knots.len(), t);
                if i + 1 >= knots.len() {
                    0.0
                } else {
                    let (t0, w0) = knots[i];
                    let (t1, w1) = knots[i + 1];
                    (w1 - w0) / (t1 - t0)
                }
            }
            Self::Sampled { step, values } => {
                let i = (t / step).floor() as usize;
                if i + 1 >= values.len() {
                    0.0
                } else {
                    (values[i + 1] - values[i]) / step
                }
            }
            Self::Smooth { derivative, .. } => derivative(t),
        }
    }

    pub fn linear_rate(&self) -> Option<f64> {
        match self {
            Self::Linear { rate } => Some(*rate),
            _ => None,
        }
    }

    /// Checks `w(0) = 0` and `w(t) ≥ 0` on the given times.
    pub fn validate_on(&self, times: &[f64]) -> Result<()> {
        let w0 = self.value(0.0);
        if w0.abs() > 1e-14 {
            return Err(Error::InvalidWeight(format!("w(0) = {w0}, expected 0")));
        }
        for &t in times {
            let w = self.value(t);
            if !(w >= -1e-14) {
                return Err(Error::InvalidWeight(format!("w({t}) = {w} is negative")));
            }
        }
        Ok(())
    }
}

/// Index of the segment `[t_i, t_{i+1})` containing `t` (last index when
/// `t` lies past the final knot).
fn segment(times: impl Iterator<Item = f64>, n: usize, t: f64) -> usize {
    let mut idx = 0;
    for (i, ti) in times.enumerate() {
        if ti <= t {
            idx = i;
        } else {
            break;
        }
    }
    idx.min(n - 1)
}
