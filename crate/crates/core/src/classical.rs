//! Classical rate equations for the probability vector `(p_0, …, p_{d+1})`
//! of a generalized Pauli channel.
//!
//! Every matrix returned here is the generator `G(t)` of `ṗ = G(t) p`, with
//! any `1/d` prefactor already folded in.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::RMatrix;
use crate::mixture::{check_simplex, MixtureSpec, RateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flavor {
    MarkovConstant,
    MixtureTimeDep,
    RateTimeDep,
}

impl Flavor {
    pub fn tag(self) -> &'static str {
        match self {
            Flavor::MarkovConstant => "markov",
            Flavor::MixtureTimeDep => "mixture",
            Flavor::RateTimeDep => "ratedep",
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    Constant(RMatrix),
    Mixture(MixtureSpec),
    Rates(MixtureSpec),
}

#[derive(Debug, Clone)]
pub struct ClassicalGenerator {
    dim: usize,
    flavor: Flavor,
    source: Source,
}

impl ClassicalGenerator {
    /// Time-independent generator. `matrix` must be `(d+2)×(d+2)`.
    pub fn constant(matrix: RMatrix, flavor: Flavor) -> Result<Self> {
        let n = matrix.nrows();
        if n < 4 || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        Ok(Self {
            dim: n,
            flavor,
            source: Source::Constant(matrix),
        })
    }

    /// `(1/d) 𝔏(t)` of the mixture, evaluated on demand.
    pub fn mixture(spec: MixtureSpec) -> Self {
        Self {
            dim: spec.dim() + 2,
            flavor: Flavor::MixtureTimeDep,
            source: Source::Mixture(spec),
        }
    }

    /// Rate-dependent generator built from the decoherence rates `γ(t)`.
    pub fn rate_dependent(spec: MixtureSpec) -> Self {
        Self {
            dim: spec.dim() + 2,
            flavor: Flavor::RateTimeDep,
            source: Source::Rates(spec),
        }
    }

    /// Size of the state space, `d + 2`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.source, Source::Constant(_))
    }

    pub fn matrix_at(&self, t: f64) -> Result<RMatrix> {
        match &self.source {
            Source::Constant(m) => Ok(m.clone()),
            Source::Mixture(spec) => mixture_generator(spec, t),
            Source::Rates(spec) => Ok(ratedep_generator(&spec.rates_at(t)?)),
        }
    }
}

/// Constant Markov generator with rates `0 → α: (d-1)x_α` and `α → 0: 1`.
pub fn markov_matrix(x: &[f64], d: usize) -> Result<RMatrix> {
    check_simplex(x, d + 1)?;
    let n = d + 2;
    let dm1 = (d - 1) as f64;
    let mut m = DMatrix::zeros(n, n);
    m[(0, 0)] = -dm1;
    for a in 1..n {
        m[(0, a)] = 1.0;
        m[(a, 0)] = dm1 * x[a - 1];
        m[(a, a)] = -1.0;
    }
    Ok(m)
}

/// Markov realization of `Σ_α x_α exp(dt L_α)`.
pub fn markov_generator(x: &[f64], d: usize) -> Result<ClassicalGenerator> {
    ClassicalGenerator::constant(markov_matrix(x, d)?, Flavor::MarkovConstant)
}

/// Markov realization of `Σ_α x_α exp(rt L_α)`: the rate-`d` generator
/// rescaled by `r/d`.
pub fn markov_generator_for_rate(x: &[f64], d: usize, r: f64) -> Result<ClassicalGenerator> {
    ClassicalGenerator::constant(
        markov_matrix(x, d)? * (r / d as f64),
        Flavor::MarkovConstant,
    )
}

/// Reduced generator for a shared weight: `(ẇ/d)` times the Markov matrix.
pub fn equal_weight_generator(x: &[f64], d: usize, wdot: f64) -> Result<RMatrix> {
    Ok(markov_matrix(x, d)? * (wdot / d as f64))
}

/// `(1/d) 𝔏(t)` with `𝔏_00 = -W`, `𝔏_0k = -W + dẇ_k`,
/// `𝔏_k0 = 𝔏_kl = (d-1)x_k ẇ_k`, `𝔏_kk = -[d(1-x_k) + x_k] ẇ_k` and
/// `W = (d-1) Σ_α ẇ_α x_α`.
pub fn mixture_generator(spec: &MixtureSpec, t: f64) -> Result<RMatrix> {
    let d = spec.dim();
    let df = d as f64;
    let x = spec.x();
    let wdot: Vec<f64> = spec.weights().iter().map(|w| w.derivative(t)).collect();
    if let Some((index, &value)) = wdot.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeWeightDerivative {
            t,
            index: index + 1,
            value,
        });
    }
    let big_w = (df - 1.0) * wdot.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
    let n = d + 2;
    let mut m = DMatrix::zeros(n, n);
    m[(0, 0)] = -big_w;
    for k in 1..n {
        let (xk, wk) = (x[k - 1], wdot[k - 1]);
        m[(0, k)] = -big_w + df * wk;
        for l in 0..n {
            m[(k, l)] = if l == k {
                -(df * (1.0 - xk) + xk) * wk
            } else {
                (df - 1.0) * xk * wk
            };
        }
    }
    Ok(m / df)
}

/// `(1/d) 𝒜(t)` from the decoherence rates, with `γ_0 = Σ_β γ_β`:
/// `𝒜_00 = -(d-1)γ_0`, `𝒜_0β = γ_β`, `𝒜_α0 = (d-1)γ_α`,
/// `𝒜_αα = (d-2)γ_α - (d-1)γ_0`, `𝒜_αβ = γ_0 - γ_α - γ_β`.
pub fn ratedep_generator(rates: &RateVector) -> RMatrix {
    let g = &rates.gamma;
    let d = g.len() - 1;
    let df = d as f64;
    let g0: f64 = g.iter().sum();
    let n = d + 2;
    let mut m = DMatrix::zeros(n, n);
    m[(0, 0)] = -(df - 1.0) * g0;
    for a in 1..n {
        let ga = g[a - 1];
        m[(0, a)] = ga;
        m[(a, 0)] = (df - 1.0) * ga;
        for b in 1..n {
            m[(a, b)] = if a == b {
                (df - 2.0) * ga - (df - 1.0) * g0
            } else {
                g0 - ga - g[b - 1]
            };
        }
    }
    m / df
}

/// Largest absolute column sum of `m`.
pub fn column_sum_error(m: &RMatrix) -> f64 {
    m.column_iter().map(|c| c.sum().abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityTrajectory {
    pub flavor: Flavor,
    pub t_grid: Vec<f64>,
    pub p: Vec<Vec<f64>>,
}

impl ProbabilityTrajectory {
    pub fn max_normalization_error(&self) -> f64 {
        self.p
            .iter()
            .map(|p| (p.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.p
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_initial(p0: &[f64], n: usize) -> Result<()> {
    if p0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p0.len(),
        });
    }
    check_simplex(p0, n)
}

/// Fixed-step RK4 from `t = 0` through every grid point, step at most
/// `t_max / 2000`.
pub fn integrate(
    gen: &ClassicalGenerator,
    p0: &[f64],
    grid: &TimeGrid,
) -> Result<ProbabilityTrajectory> {
    check_initial(p0, gen.dim())?;
    let t_max = grid.last();
    let h_max = t_max / 2000.0;
    let mut p = DVector::from_column_slice(p0);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid.points() {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            if h <= f64::EPSILON * target.max(1.0) {
                return Err(Error::StepSizeUnderflow(h));
            }
            for i in 0..steps {
                let s = t + h * i as f64;
                p = rk4_step(gen, &p, s, h)?;
            }
            t = target;
        }
        out.push(p.iter().copied().collect());
    }
    Ok(ProbabilityTrajectory {
        flavor: gen.flavor(),
        t_grid: grid.points().to_vec(),
        p: out,
    })
}

fn rk4_step(gen: &ClassicalGenerator, p: &DVector<f64>, t: f64, h: f64) -> Result<DVector<f64>> {
    let m0 = gen.matrix_at(t)?;
    let mh = gen.matrix_at(t + 0.5 * h)?;
    let m1 = gen.matrix_at(t + h)?;
    let k1 = &m0 * p;
    let k2 = &mh * (p + &k1 * (0.5 * h));
    let k3 = &mh * (p + &k2 * (0.5 * h));
    let k4 = &m1 * (p + &k3 * h);
    Ok(p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// `exp(tG) p0` for a constant generator.
pub fn propagate_constant(gen: &ClassicalGenerator, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    if !gen.is_constant() {
        return Err(Error::PreconditionUnmet(
            "matrix exponential path needs a constant generator".into(),
        ));
    }
    check_initial(p0, gen.dim())?;
    let m = gen.matrix_at(0.0)? * t;
    Ok((m.exp() * DVector::from_column_slice(p0))
        .iter()
        .copied()
        .collect())
}

/// Normalized null vector of a generator (its stationary distribution).
pub fn stationary_distribution(m: &RMatrix) -> Vec<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    let v: Vec<f64> = v_t.row(idx).iter().copied().collect();
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// `(1, 0, …, 0)`: the identity channel's probability vector.
pub fn identity_start(d: usize) -> Vec<f64> {
    let mut p = vec![0.0; d + 2];
    p[0] = 1.0;
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_simplex_point;
    use crate::weight::WeightFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_dev(traj: &ProbabilityTrajectory, spec: &MixtureSpec) -> f64 {
        traj.t_grid
            .iter()
            .zip(&traj.p)
            .map(|(&t, p)| {
                let q = spec.closed_form_probs(t).unwrap();
                p.iter()
                    .zip(&q)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Semigroup-mixture probabilities, written out directly.
    fn prob_closed_form(x: &[f64], d: usize, r: f64, t: f64) -> Vec<f64> {
        let df = d as f64;
        let e = (-r * t).exp();
        let mut p = vec![(1.0 + (df - 1.0) * e) / df];
        p.extend(x.iter().map(|xa| (df - 1.0) / df * (1.0 - e) * xa));
        p
    }

    #[test]
    fn markov_matrix_d3_display() {
        let x = [0.1, 0.2, 0.3, 0.4];
        let m = markov_matrix(&x, 3).unwrap();
        let row0: Vec<f64> = m.row(0).iter().copied().collect();
        assert_eq!(row0, vec![-2.0, 1.0, 1.0, 1.0, 1.0]);
        for a in 1..5 {
            assert_eq!(m[(a, 0)], 2.0 * x[a - 1]);
            assert_eq!(m[(a, a)], -1.0);
        }
        assert_eq!(m[(1, 2)], 0.0);
        assert!(column_sum_error(&m) < 1e-15);
        assert!(m.iter().enumerate().all(|(i, v)| i % 6 == 0 || *v >= 0.0));
    }

    #[test]
    fn markov_matrix_d2_display() {
        let m = markov_matrix(&[0.2, 0.3, 0.5], 2).unwrap();
        let row0: Vec<f64> = m.row(0).iter().copied().collect();
        assert_eq!(row0, vec![-1.0, 1.0, 1.0, 1.0]);
        assert_eq!(m[(3, 0)], 0.5);
    }

    #[test]
    fn markov_flow_matches_closed_form() {
        let x = vec![0.1, 0.2, 0.3, 0.4];
        let grid = TimeGrid::linear(0.0, 4.0, 41).unwrap();
        for r in [3.0, 1.0, 5.5] {
            let gen = markov_generator_for_rate(&x, 3, r).unwrap();
            let traj = integrate(&gen, &identity_start(3), &grid).unwrap();
            for (t, p) in traj.t_grid.iter().zip(&traj.p) {
                let q = prob_closed_form(&x, 3, r, *t);
                for (a, b) in p.iter().zip(&q) {
                    assert!((a - b).abs() < 1e-8, "r={r} t={t}");
                }
            }
        }
        // the unscaled matrix is the rate-d case
        let traj = integrate(&markov_generator(&x, 3).unwrap(), &identity_start(3), &grid).unwrap();
        let q = prob_closed_form(&x, 3, 3.0, 4.0);
        assert!((traj.p[40][2] - q[2]).abs() < 1e-8);
    }

    #[test]
    fn rk4_agrees_with_matrix_exponential() {
        let x = vec![0.3, 0.3, 0.2, 0.1, 0.05, 0.05];
        let gen = markov_generator(&x, 5).unwrap();
        let mut p0 = vec![0.0; 7];
        p0[2] = 0.5;
        p0[6] = 0.5;
        let traj = integrate(&gen, &p0, &TimeGrid::linear(0.0, 1.0, 3).unwrap()).unwrap();
        let e = propagate_constant(&gen, &p0, 1.0).unwrap();
        for (a, b) in traj.p[2].iter().zip(&e) {
            assert!((a - b).abs() < 1e-9);
        }
        let spec = MixtureSpec::semigroup(2, vec![0.5, 0.5, 0.0], 2.0).unwrap();
        assert!(
            propagate_constant(&ClassicalGenerator::mixture(spec), &identity_start(2), 1.0)
                .is_err()
        );
    }

    #[test]
    fn zero_generator_is_constant() {
        let gen =
            ClassicalGenerator::constant(DMatrix::zeros(5, 5), Flavor::MarkovConstant).unwrap();
        let p0 = vec![0.2; 5];
        let traj = integrate(&gen, &p0, &TimeGrid::linear(0.0, 3.0, 4).unwrap()).unwrap();
        assert!(traj.p.iter().all(|p| p == &p0));
    }

    #[test]
    fn integrate_validates_input() {
        let gen = markov_generator(&[0.25; 4], 3).unwrap();
        let grid = TimeGrid::linear(0.0, 1.0, 3).unwrap();
        assert!(integrate(&gen, &[0.5, 0.5, 0.0, 0.0], &grid).is_err());
        assert!(integrate(&gen, &[0.5, 0.6, 0.0, 0.0, 0.0], &grid).is_err());
    }

    #[test]
    fn markov_flow_preserves_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let grid = TimeGrid::linear(0.0, 5.0, 51).unwrap();
        for _ in 0..100 {
            let x = random_simplex_point(4, &mut rng);
            let p0 = random_simplex_point(5, &mut rng);
            let traj = integrate(&markov_generator(&x, 3).unwrap(), &p0, &grid).unwrap();
            assert!(traj.min_entry() >= -1e-10);
            assert!(traj.max_normalization_error() < 1e-10);
        }
    }

    #[test]
    fn stationary_state() {
        let x = [0.1, 0.2, 0.3, 0.4];
        let m = markov_matrix(&x, 3).unwrap();
        let p = stationary_distribution(&m);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-12);
        for a in 1..5 {
            assert!((p[a] - 2.0 * x[a - 1] / 3.0).abs() < 1e-12);
        }
        let res = &m * DVector::from_vec(p);
        assert!(res.amax() < 1e-12);
    }

    #[test]
    fn mixture_generator_d2_display() {
        let w = vec![
            WeightFunction::linear(1.0).unwrap(),
            WeightFunction::linear(2.0).unwrap(),
            WeightFunction::linear(3.0).unwrap(),
        ];
        let x = vec![0.2, 0.3, 0.5];
        let spec = MixtureSpec::new(2, x.clone(), w).unwrap();
        let m = mixture_generator(&spec, 0.7).unwrap() * 2.0;
        let wd = [1.0, 2.0, 3.0];
        let big_w: f64 = wd.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((m[(0, 0)] + big_w).abs() < 1e-14);
        for k in 1..4 {
            assert!((m[(0, k)] - (2.0 * wd[k - 1] - big_w)).abs() < 1e-14);
            assert!((m[(k, k)] + (2.0 - x[k - 1]) * wd[k - 1]).abs() < 1e-14);
            for l in (0..4).filter(|&l| l != k) {
                assert!((m[(k, l)] - wd[k - 1] * x[k - 1]).abs() < 1e-14);
            }
        }
        assert!(column_sum_error(&m) < 1e-14);
    }

    #[test]
    fn mixture_generator_rejects_decreasing_weight() {
        let w = WeightFunction::sin_squared(1.0, 1.0).unwrap();
        let spec = MixtureSpec::shared_weight(3, vec![0.25; 4], w).unwrap();
        assert!(mixture_generator(&spec, 0.5).is_ok());
        assert!(matches!(
            mixture_generator(&spec, 2.0),
            Err(Error::NegativeWeightDerivative { index: 1, .. })
        ));
    }

    #[test]
    fn mixture_flow_matches_closed_form() {
        let grid = TimeGrid::linear(0.0, 3.0, 31).unwrap();
        let w = vec![
            WeightFunction::linear(1.0).unwrap(),
            WeightFunction::smooth("t^2", |t| t * t, |t| 2.0 * t),
            WeightFunction::linear(0.5).unwrap(),
            WeightFunction::smooth("t+sin", |t| t + t.sin(), |t| 1.0 + t.cos()),
        ];
        let spec = MixtureSpec::new(3, vec![0.1, 0.2, 0.3, 0.4], w).unwrap();
        let gen = ClassicalGenerator::mixture(spec.clone());
        let traj = integrate(&gen, &identity_start(3), &grid).unwrap();
        assert!(max_dev(&traj, &spec) < 1e-8);
        for &t in grid.points() {
            assert!(column_sum_error(&gen.matrix_at(t).unwrap()) < 1e-12);
        }
    }

    /// For a shared weight the full and reduced generators differ as
    /// matrices but drive the same flow out of `(1, 0, …, 0)`.
    #[test]
    fn equal_weight_reduction() {
        let x = vec![0.1, 0.2, 0.3, 0.4];
        let spec = MixtureSpec::semigroup(3, x.clone(), 2.0).unwrap();
        for t in [0.1, 0.8, 2.5] {
            let full = mixture_generator(&spec, t).unwrap();
            let reduced = equal_weight_generator(&x, 3, 2.0).unwrap();
            let p = DVector::from_vec(spec.closed_form_probs(t).unwrap());
            assert!((&full * &p - &reduced * &p).amax() < 1e-13);
            assert!((&full - &reduced).amax() > 0.1);
        }
        // ẇ/3 times the matrix with first column (-2, x_k) does not
        let mut shown = markov_matrix(&x, 3).unwrap();
        for k in 1..5 {
            shown[(k, 0)] = x[k - 1];
        }
        let p = DVector::from_vec(spec.closed_form_probs(1.0).unwrap());
        let exact = mixture_generator(&spec, 1.0).unwrap() * &p;
        assert!((shown * (2.0 / 3.0) * &p - exact).amax() > 1e-3);
    }

    #[test]
    fn ratedep_matches_d3_display() {
        let g = vec![0.3, -0.2, 0.7, 0.1];
        let rv = RateVector {
            t: 1.0,
            gamma: g.clone(),
            mu: vec![0.0; 4],
        };
        let a = ratedep_generator(&rv) * 3.0;
        let g0: f64 = g.iter().sum();
        let shown = DMatrix::from_row_slice(
            5,
            5,
            &[
                -2.0 * g0,
                g[0],
                g[1],
                g[2],
                g[3],
                2.0 * g[0],
                g[0] - 2.0 * g0,
                g[2] + g[3],
                g[1] + g[3],
                g[1] + g[2],
                2.0 * g[1],
                g[2] + g[3],
                g[1] - 2.0 * g0,
                g[0] + g[3],
                g[0] + g[2],
                2.0 * g[2],
                g[1] + g[3],
                g[0] + g[3],
                g[2] - 2.0 * g0,
                g[0] + g[1],
                2.0 * g[3],
                g[1] + g[2],
                g[0] + g[2],
                g[0] + g[1],
                g[3] - 2.0 * g0,
            ],
        );
        assert!((a - shown).amax() < 1e-15);
    }

    #[test]
    fn ratedep_flow_matches_closed_form() {
        let grid = TimeGrid::linear(0.0, 3.0, 31).unwrap();
        for d in [2usize, 3, 5] {
            let mut x = vec![1.0 / d as f64; d + 1];
            x[d] = 0.0;
            let spec = MixtureSpec::semigroup(d, x, d as f64).unwrap();
            let gen = ClassicalGenerator::rate_dependent(spec.clone());
            let traj = integrate(&gen, &identity_start(d), &grid).unwrap();
            assert!(max_dev(&traj, &spec) < 1e-8, "d={d}");
            assert!(traj.max_normalization_error() < 1e-10);
        }
    }

    #[test]
    fn ratedep_has_negative_rates_for_example_two() {
        let spec =
            MixtureSpec::semigroup(3, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0], 3.0).unwrap();
        for t in [0.05, 0.5, 3.0] {
            let m = ratedep_generator(&spec.rates_at(t).unwrap());
            assert!(m[(0, 4)] < 0.0 && m[(4, 0)] < 0.0);
            assert!(column_sum_error(&m) < 1e-12);
        }
    }

    #[test]
    fn three_flavors_agree_on_semigroup_mixture() {
        let x = vec![0.4, 0.3, 0.2, 0.1];
        let r = 3.0;
        let spec = MixtureSpec::semigroup(3, x.clone(), r).unwrap();
        let grid = TimeGrid::linear(0.0, 2.0, 21).unwrap();
        let p0 = identity_start(3);
        let a = integrate(&markov_generator_for_rate(&x, 3, r).unwrap(), &p0, &grid).unwrap();
        let b = integrate(&ClassicalGenerator::mixture(spec.clone()), &p0, &grid).unwrap();
        let c = integrate(&ClassicalGenerator::rate_dependent(spec), &p0, &grid).unwrap();
        for i in 0..grid.len() {
            for j in 0..5 {
                assert!((a.p[i][j] - b.p[i][j]).abs() < 1e-8);
                assert!((a.p[i][j] - c.p[i][j]).abs() < 1e-8);
            }
        }
    }
}
