//! Brute-force cross-checks on dense superoperators.
//!
//! Vectorization is column-stacking: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, so the
//! entry `S[a + b·d, i + j·d]` is `<a|Λ(|i><j|)|b>`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{
    self, hermitian_eigenvalues, random_density_matrix, trace_norm, unvectorize, vectorize, CMatrix,
};
use crate::mixture::MixtureSpec;
use crate::mub::MubSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            matrix: linalg::identity(d * d),
        }
    }

    pub fn from_matrix(d: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != d * d || matrix.ncols() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim: d, matrix })
    }

    /// `Σ_k P_kᵀ ⊗ P_k`, the superoperator of the pinching `Φ_α`.
    pub fn pinching(m: &MubSet, alpha: usize) -> Self {
        let d = m.dim();
        let matrix = m
            .projectors(alpha)
            .iter()
            .fold(CMatrix::zeros(d * d, d * d), |acc, p| {
                acc + linalg::kron(&p.transpose(), p)
            });
        Self { dim: d, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(x)), self.dim)
    }

    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn inverse(&self) -> Option<Superoperator> {
        self.matrix.clone().try_inverse().map(|matrix| Self {
            dim: self.dim,
            matrix,
        })
    }

    /// Choi matrix by reshuffling, normalized to trace 1:
    /// `C[i·d + a, j·d + b] = S[a + b·d, i + j·d] / d`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut c = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        c[(i * d + a, j * d + b)] = self.matrix[(a + b * d, i + j * d)] / d as f64;
                    }
                }
            }
        }
        c
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.choi())[0]
    }

    /// Deviation of `vec(1)† S` from `vec(1)†`.
    pub fn trace_preservation_error(&self) -> f64 {
        let id = vectorize(&linalg::identity(self.dim));
        let row = id.adjoint() * &self.matrix;
        row.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Dense superoperator of a generalized Pauli channel, assembled from the
/// projector sandwiches (not from the eigenvalues).
pub fn superop_from_channel(ch: &ChannelState, m: &MubSet) -> Result<Superoperator> {
    if ch.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: ch.dim(),
        });
    }
    Ok(Pinchings::new(m).channel(ch))
}

/// `Σ_α γ_α (Φ_α - id)`.
pub fn generator_superop(gamma: &[f64], m: &MubSet) -> Superoperator {
    Pinchings::new(m).generator(gamma)
}

/// Cached `Φ_α` superoperators for repeated assembly.
struct Pinchings {
    dim: usize,
    phis: Vec<CMatrix>,
}

impl Pinchings {
    fn new(m: &MubSet) -> Self {
        Self {
            dim: m.dim(),
            phis: (1..=m.dim() + 1)
                .map(|a| Superoperator::pinching(m, a).matrix)
                .collect(),
        }
    }

    fn channel(&self, ch: &ChannelState) -> Superoperator {
        let d = self.dim;
        let df = d as f64;
        let p = ch.probs();
        let mut s = linalg::identity(d * d).scale((df * p[0] - 1.0) / (df - 1.0));
        for (phi, pa) in self.phis.iter().zip(&p[1..]) {
            s += phi.scale(df / (df - 1.0) * pa);
        }
        Superoperator { dim: d, matrix: s }
    }

    fn generator(&self, gamma: &[f64]) -> Superoperator {
        let d = self.dim;
        let id = linalg::identity(d * d);
        let matrix = gamma
            .iter()
            .zip(&self.phis)
            .fold(CMatrix::zeros(d * d, d * d), |acc, (&g, phi)| {
                acc + (phi - &id).scale(g)
            });
        Superoperator { dim: d, matrix }
    }
}

/// RK4 integration of `Λ̇ = 𝓛(t)Λ` from the identity using the computed
/// rates; returns the largest entrywise deviation from the closed-form
/// channel over the step grid on `[0, t_max]`.
pub fn reintegrate(spec: &MixtureSpec, m: &MubSet, t_max: f64, steps: usize) -> Result<f64> {
    if steps < 1000 {
        return Err(Error::PreconditionUnmet(format!(
            "need at least 1000 steps, got {steps}"
        )));
    }
    if !(t_max > 0.0) {
        return Err(Error::PreconditionUnmet(format!(
            "t_max must be > 0, got {t_max}"
        )));
    }
    let cache = Pinchings::new(m);
    let gen = |t: f64| -> Result<CMatrix> { Ok(cache.generator(&spec.rates_at(t)?.gamma).matrix) };
    let h = t_max / steps as f64;
    let mut s = linalg::identity(m.dim() * m.dim());
    let mut worst = 0.0f64;
    for i in 0..steps {
        let t = h * i as f64;
        let l0 = gen(t)?;
        let lh = gen(t + 0.5 * h)?;
        let l1 = gen(t + h)?;
        let k1 = &l0 * &s;
        let k2 = &lh * (&s + k1.scale(0.5 * h));
        let k3 = &lh * (&s + k2.scale(0.5 * h));
        let k4 = &l1 * (&s + k3.scale(h));
        s += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        let exact = cache.channel(&spec.channel_at(t + h)?);
        worst = worst.max(linalg::max_abs_diff(&s, &exact.matrix));
    }
    Ok(worst)
}

/// Largest central-difference derivative of `‖Λ(t)(ρ_1 - ρ_2)‖_1` over
/// `trials` random state pairs and the interior grid points, with step
/// `h = 1e-4 · t_max`. Trial `i` draws its states from seed `seed + i`.
pub fn blp_monotonicity_check(
    spec: &MixtureSpec,
    m: &MubSet,
    trials: usize,
    grid: &TimeGrid,
    seed: u64,
) -> Result<f64> {
    let h = 1e-4 * grid.last();
    let times: Vec<f64> = grid.points().iter().copied().filter(|&t| t >= h).collect();
    let maps = times
        .iter()
        .map(|&t| {
            Ok((
                superop_from_channel(&spec.channel_at(t - h)?, m)?,
                superop_from_channel(&spec.channel_at(t + h)?, m)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = m.dim();
    let worst = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let x = random_density_matrix(d, &mut rng) - random_density_matrix(d, &mut rng);
            maps.iter()
                .map(|(lo, hi)| (trace_norm(&hi.apply(&x)) - trace_norm(&lo.apply(&x))) / (2.0 * h))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(worst)
}

/// Dense propagator `V(t, s) = Λ(t) Λ(s)⁻¹`.
pub fn propagator(spec: &MixtureSpec, m: &MubSet, s: f64, t: f64) -> Result<Superoperator> {
    let ls = superop_from_channel(&spec.channel_at(s)?, m)?;
    let lt = superop_from_channel(&spec.channel_at(t)?, m)?;
    let inv = ls
        .inverse()
        .ok_or(Error::SingularIntermediateMap { s, value: 0.0 })?;
    Ok(lt.compose(&inv))
}

/// Smallest propagator Choi eigenvalue over `pairs` random `0 ≤ s ≤ t ≤
/// t_max` pairs.
pub fn min_propagator_choi(
    spec: &MixtureSpec,
    m: &MubSet,
    pairs: usize,
    t_max: f64,
    seed: u64,
) -> Result<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let a = rng.random_range(0.0..t_max);
        let b = rng.random_range(0.0..t_max);
        let (s, t) = if a <= b { (a, b) } else { (b, a) };
        worst = worst.min(propagator(spec, m, s, t)?.min_choi_eigenvalue());
    }
    Ok(worst)
}

/// Smallest Choi eigenvalue of `Λ(t)` over the grid.
pub fn min_channel_choi(spec: &MixtureSpec, m: &MubSet, grid: &TimeGrid) -> Result<f64> {
    grid.points().iter().try_fold(f64::INFINITY, |acc, &t| {
        Ok(acc.min(superop_from_channel(&spec.channel_at(t)?, m)?.min_choi_eigenvalue()))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub fixture: String,
    pub deviation: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn below(check: &str, fixture: &str, deviation: f64, tol: f64) -> Self {
        Self {
            check: check.into(),
            fixture: fixture.into(),
            deviation,
            pass: deviation < tol,
        }
    }
}

/// Oracle suite for one fixture: re-integration over `[0, 5/r]` with 5000
/// steps, channel Choi positivity, and (for qubits) BLP monotonicity.
pub fn verify_fixture(
    name: &str,
    spec: &MixtureSpec,
    horizon: f64,
    seed: u64,
) -> Result<Vec<CheckRecord>> {
    let m = crate::mub::build_mubs(spec.dim())?;
    let mut out = Vec::new();
    let dev = reintegrate(spec, &m, horizon, 5000)?;
    out.push(CheckRecord::below("reintegrate", name, dev, 1e-6));
    let grid = TimeGrid::linear(0.0, horizon, 51)?;
    let min_choi = min_channel_choi(spec, &m, &grid)?;
    out.push(CheckRecord {
        check: "choi_psd".into(),
        fixture: name.into(),
        deviation: (-min_choi).max(0.0),
        pass: min_choi >= -1e-10,
    });
    let min_p = grid.points().iter().try_fold(f64::INFINITY, |acc, &t| {
        Ok::<_, Error>(acc.min(spec.channel_at(t)?.min_prob()))
    })?;
    out.push(CheckRecord {
        check: "probabilities_nonnegative".into(),
        fixture: name.into(),
        deviation: (-min_p).max(0.0),
        pass: min_p >= -1e-12,
    });
    if spec.dim() == 2 {
        let grid = TimeGrid::linear(0.0, horizon, 101)?;
        let worst = blp_monotonicity_check(spec, &m, 200, &grid, seed)?;
        out.push(CheckRecord {
            check: "blp_monotonicity".into(),
            fixture: name.into(),
            deviation: worst.max(0.0),
            pass: worst <= 1e-8,
        });
    }
    Ok(out)
}
