//! Mixtures of dephasing semigroups `Λ(t) = Σ_α x_α exp(w_α(t) L_α)` with
//! `L_α = Φ_α - id`.
//!
//! Each `exp(w L_α)` acts as 1 on the `U_α^k` sector and as `e^{-w}` on every
//! other sector, so the mixture has eigenvalues
//! `λ_α = x_α (1 - e^{-w_α}) + Σ_β x_β e^{-w_β}`. The time-local generator
//! `L(t) = Σ_α γ_α(t) L_α` follows from `μ_α = -d/dt ln λ_α` and
//! `γ_α = (1/d) Σ_β μ_β - μ_α`.

use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::weight::WeightFunction;

/// Guard on the (rescaled) denominator of `μ_α`.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;

/// Validates that `x` is a probability vector of length `n`.
pub fn check_simplex(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if let Some(v) = x.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::NotOnSimplex(format!("entry {v} is negative")));
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::NotOnSimplex(format!("entries sum to {sum}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MixtureSpec {
    dim: usize,
    x: Vec<f64>,
    weights: Vec<WeightFunction>,
}

impl MixtureSpec {
    pub fn new(d: usize, x: Vec<f64>, weights: Vec<WeightFunction>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if !crate::linalg::is_prime(d) {
            return Err(Error::NonPrimeDimension(d));
        }
        check_simplex(&x, d + 1)?;
        if weights.len() != d + 1 {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                found: weights.len(),
            });
        }
        for w in &weights {
            w.validate_on(&[])?;
        }
        Ok(Self { dim: d, x, weights })
    }

    /// Convex combination of semigroups `exp(r t L_α)`.
    pub fn semigroup(d: usize, x: Vec<f64>, r: f64) -> Result<Self> {
        let w = WeightFunction::linear(r)?;
        Self::new(d, x, vec![w; d + 1])
    }

    /// All components share the weight `w`.
    pub fn shared_weight(d: usize, x: Vec<f64>, w: WeightFunction) -> Result<Self> {
        Self::new(d, x, vec![w; d + 1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn weights(&self) -> &[WeightFunction] {
        &self.weights
    }

    /// `Some(r)` when every weight is `Linear(r)` with the same `r`.
    pub fn common_rate(&self) -> Option<f64> {
        let r = self.weights[0].linear_rate()?;
        self.weights
            .iter()
            .all(|w| w.linear_rate() == Some(r))
            .then_some(r)
    }

    fn check_time(t: f64) -> Result<()> {
        if t < 0.0 || t.is_nan() {
            Err(Error::NegativeTime(t))
        } else {
            Ok(())
        }
    }

    pub fn eigenvalues_at(&self, t: f64) -> Result<Vec<f64>> {
        Self::check_time(t)?;
        let decay: Vec<f64> = self.weights.iter().map(|w| (-w.value(t)).exp()).collect();
        let s: f64 = self.x.iter().zip(&decay).map(|(x, e)| x * e).sum();
        Ok(self
            .x
            .iter()
            .zip(&self.weights)
            .map(|(&xa, w)| xa * -(-w.value(t)).exp_m1() + s)
            .collect())
    }

    pub fn channel_at(&self, t: f64) -> Result<ChannelState> {
        ChannelState::from_eigenvalues(self.dim, self.eigenvalues_at(t)?)
    }

    /// Probability vector straight from the mixture:
    /// `p_0 = [1 + (d-1) Σ x e^{-w}]/d`, `p_k = (d-1)/d x_k (1 - e^{-w_k})`.
    pub fn closed_form_probs(&self, t: f64) -> Result<Vec<f64>> {
        Self::check_time(t)?;
        let d = self.dim as f64;
        let s: f64 = self
            .x
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * (-w.value(t)).exp())
            .sum();
        let mut p = vec![(1.0 + (d - 1.0) * s) / d];
        p.extend(
            self.x
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| (d - 1.0) / d * x * -(-w.value(t)).exp_m1()),
        );
        Ok(p)
    }

    /// `μ_α(t)`. Numerator and denominator are rescaled by `e^{m}` with
    /// `m = min{w_β : x_β > 0}`, which keeps the ratio finite once `e^{-w}`
    /// underflows.
    pub fn mu_vector(&self, t: f64) -> Result<Vec<f64>> {
        Self::check_time(t)?;
        let w: Vec<f64> = self.weights.iter().map(|f| f.value(t)).collect();
        let wdot: Vec<f64> = self.weights.iter().map(|f| f.derivative(t)).collect();
        let m = self
            .x
            .iter()
            .zip(&w)
            .filter(|(x, _)| **x > 0.0)
            .map(|(_, w)| *w)
            .fold(f64::INFINITY, f64::min);
        let scaled: Vec<f64> = w.iter().map(|wb| (m - wb).exp()).collect();
        let s: f64 = self.x.iter().zip(&scaled).map(|(x, e)| x * e).sum();
        let flux: f64 = (0..=self.dim)
            .map(|b| self.x[b] * wdot[b] * scaled[b])
            .sum();
        let growth = m.exp();
        (0..=self.dim)
            .map(|a| {
                let num = flux - self.x[a] * wdot[a] * scaled[a];
                let den = if self.x[a] > 0.0 {
                    self.x[a] * -(-w[a]).exp_m1() * growth + s
                } else {
                    s
                };
                if !(den >= DENOMINATOR_FLOOR) {
                    return Err(Error::DegenerateDenominator { t, index: a + 1 });
                }
                Ok(num / den)
            })
            .collect()
    }

    pub fn rates_at(&self, t: f64) -> Result<RateVector> {
        Ok(RateVector::from_mu(t, self.dim, self.mu_vector(t)?))
    }
}

/// Decoherence rates `γ_α(t)` and the auxiliary `μ_α(t)` (both 1/time).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RateVector {
    pub t: f64,
    pub gamma: Vec<f64>,
    pub mu: Vec<f64>,
}

impl RateVector {
    /// `γ_α = (1/d) Σ_β μ_β - μ_α`.
    pub fn from_mu(t: f64, d: usize, mu: Vec<f64>) -> Self {
        let mean = mu.iter().sum::<f64>() / d as f64;
        let gamma = mu.iter().map(|m| mean - m).collect();
        Self { t, gamma, mu }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len() - 1
    }

    pub fn min_gamma(&self) -> f64 {
        self.gamma.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Closed-form rates of `Σ_α x_α exp(r t L_α)`:
/// `μ_α = r (1 - x_α) / [1 + (e^{rt} - 1) x_α]`.
pub fn rates_semigroup(x: &[f64], r: f64, t: f64) -> Result<RateVector> {
    if x.len() < 3 {
        return Err(Error::DimensionTooSmall(x.len().saturating_sub(1)));
    }
    let d = x.len() - 1;
    check_simplex(x, d + 1)?;
    if !(r > 0.0) {
        return Err(Error::InvalidWeight(format!("rate must be > 0, got {r}")));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let e = (-r * t).exp();
    let mu = x
        .iter()
        .map(|&xa| {
            if xa == 0.0 {
                r
            } else {
                // multiply through by e^{-rt} so large rt stays finite
                r * (1.0 - xa) * e / (xa + (1.0 - xa) * e)
            }
        })
        .collect();
    Ok(RateVector::from_mu(t, d, mu))
}

/// Rates at `t_star` of the shared-weight mixture with `x_α = 1/(d+1)`,
/// where `γ_α = ẇ/(d + e^{w})` are all negative whenever `ẇ(t_star) < 0`.
pub fn all_negative_witness(d: usize, w: WeightFunction, t_star: f64) -> Result<RateVector> {
    let wdot = w.derivative(t_star);
    if !(wdot < 0.0) {
        return Err(Error::PreconditionUnmet(format!(
            "need dw/dt < 0 at t* = {t_star}, got {wdot}"
        )));
    }
    let wv = w.value(t_star);
    if !(wv > 0.0) {
        return Err(Error::PreconditionUnmet(format!(
            "need w(t*) > 0 at t* = {t_star}, got {wv}"
        )));
    }
    let spec = MixtureSpec::shared_weight(d, vec![1.0 / (d as f64 + 1.0); d + 1], w)?;
    spec.rates_at(t_star)
}
