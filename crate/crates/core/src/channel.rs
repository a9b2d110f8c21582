//! Generalized Pauli channels at a fixed time.
//!
//! A channel is stored by its eigenvalues `λ_α` (one per basis, acting on
//! the `U_α^k` sector); the probability vector `(p_0, p_1, …, p_{d+1})` is
//! derived eagerly. In the probability picture
//!
//! ```text
//! Λ = (d p_0 - 1)/(d - 1) id + d/(d - 1) Σ_α p_α Φ_α
//! ```

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::mub::MubSet;

/// Tolerance on negative probabilities when certifying complete positivity.
pub const CP_TOLERANCE: f64 = 1e-10;

/// `(p_0, …, p_{d+1})` from `(λ_1, …, λ_{d+1})`.
pub fn probs_from_eigenvalues(lambda: &[f64], d: usize) -> Vec<f64> {
    assert_eq!(lambda.len(), d + 1, "expected d + 1 eigenvalues");
    let df = d as f64;
    let sum: f64 = lambda.iter().sum();
    let d2 = df * df;
    let mut p = Vec::with_capacity(d + 2);
    p.push((1.0 + (df - 1.0) * sum) / d2);
    p.extend(
        lambda
            .iter()
            .map(|&l| (df - 1.0) * (1.0 + df * l - sum) / d2),
    );
    p
}

/// Inverse of [`probs_from_eigenvalues`]: `λ_α = (d p_0 + d p_α - 1)/(d - 1)`.
pub fn eigenvalues_from_probs(p: &[f64], d: usize) -> Result<Vec<f64>> {
    if p.len() != d + 2 {
        return Err(Error::DimensionMismatch {
            expected: d + 2,
            found: p.len(),
        });
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { sum });
    }
    let df = d as f64;
    Ok(p[1..]
        .iter()
        .map(|&pa| (df * (p[0] + pa) - 1.0) / (df - 1.0))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    dim: usize,
    probs: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl ChannelState {
    pub fn from_eigenvalues(d: usize, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != d + 1 {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                found: eigenvalues.len(),
            });
        }
        let probs = probs_from_eigenvalues(&eigenvalues, d);
        Ok(Self {
            dim: d,
            probs,
            eigenvalues,
        })
    }

    pub fn from_probs(d: usize, probs: &[f64]) -> Result<Self> {
        let eigenvalues = eigenvalues_from_probs(probs, d)?;
        Self::from_eigenvalues(d, eigenvalues)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_eigenvalues(d, vec![1.0; d + 1]).expect("consistent length")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_completely_positive(&self) -> bool {
        self.min_prob() >= -CP_TOLERANCE
    }

    /// Composition in the eigenvalue picture (componentwise product).
    pub fn compose(&self, other: &ChannelState) -> Result<ChannelState> {
        check_dim(self.dim, other.dim)?;
        let ev = self
            .eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .map(|(a, b)| a * b)
            .collect();
        ChannelState::from_eigenvalues(self.dim, ev)
    }

    /// Linear action on an arbitrary `d × d` operator through the projector
    /// sandwiches `Φ_α`.
    pub fn apply_operator(&self, x: &CMatrix, m: &MubSet) -> Result<CMatrix> {
        check_dim(self.dim, m.dim())?;
        check_dim(self.dim, x.nrows())?;
        check_dim(self.dim, x.ncols())?;
        let d = self.dim as f64;
        let mut out = x.scale((d * self.probs[0] - 1.0) / (d - 1.0));
        for alpha in 1..=self.dim + 1 {
            let w = d / (d - 1.0) * self.probs[alpha];
            out += m.pinch(alpha, x).scale(w);
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix, m: &MubSet) -> Result<DensityMatrix> {
        let min_prob = self.min_prob();
        if min_prob < -CP_TOLERANCE {
            return Err(Error::NotCompletelyPositive { min_prob });
        }
        let out = self.apply_operator(rho.matrix(), m)?;
        Ok(DensityMatrix { matrix: out })
    }

    /// Choi matrix `(id ⊗ Λ)(|Ω><Ω|)` with `|Ω> = Σ_i |ii>/√d`, trace 1.
    /// Row index `i*d + a`, column index `j*d + b` for `|i><j| ⊗ |a><b|`.
    pub fn choi_matrix(&self, m: &MubSet) -> Result<CMatrix> {
        check_dim(self.dim, m.dim())?;
        let d = self.dim;
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = linalg::ONE;
                let img = self.apply_operator(&e, m)?;
                for a in 0..d {
                    for b in 0..d {
                        choi[(i * d + a, j * d + b)] = img[(a, b)] / d as f64;
                    }
                }
            }
        }
        Ok(choi)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Hermitian, unit-trace, positive semidefinite `d × d` matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        if !linalg::is_hermitian(&matrix, 1e-12) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min_ev = linalg::hermitian_eigenvalues(&matrix)[0];
        if min_ev < -1e-10 {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: linalg::identity(d).unscale(d as f64),
        }
    }

    pub fn random<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self {
            matrix: linalg::random_density_matrix(d, rng),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mub::{build_eigenbasis, build_mubs};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_probs<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
        linalg::random_simplex_point(d + 2, rng)
    }

    #[test]
    fn identity_channel_probs() {
        assert_eq!(
            probs_from_eigenvalues(&[1.0, 1.0, 1.0], 2),
            vec![1.0, 0.0, 0.0, 0.0]
        );
        let ev = eigenvalues_from_probs(&[1.0, 0.0, 0.0, 0.0, 0.0], 3).unwrap();
        assert_eq!(ev, vec![1.0; 4]);
    }

    #[test]
    fn fully_depolarizing() {
        for d in [2usize, 3, 5] {
            let p = probs_from_eigenvalues(&vec![0.0; d + 1], d);
            let df = d as f64;
            assert!((p[0] - 1.0 / (df * df)).abs() < 1e-15);
            for &pa in &p[1..] {
                assert!((pa - (df - 1.0) / (df * df)).abs() < 1e-15);
            }
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        let ev = eigenvalues_from_probs(&[0.25; 4], 2).unwrap();
        assert!(ev.iter().all(|l| l.abs() < 1e-15));
    }

    #[test]
    fn qutrit_semigroup_mixture_matches_closed_form() {
        // λ_α = e^{-rt} + (1 - e^{-rt}) x_α, rt = 1
        let x = [0.5, 0.5, 0.0, 0.0];
        let e = (-1.0f64).exp();
        let lambda: Vec<f64> = x.iter().map(|&xa| e + (1.0 - e) * xa).collect();
        let p = probs_from_eigenvalues(&lambda, 3);
        assert!((p[0] - (1.0 + 2.0 * e) / 3.0).abs() < 1e-15);
        for (a, &xa) in x.iter().enumerate() {
            assert!((p[a + 1] - 2.0 / 3.0 * (1.0 - e) * xa).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(
            eigenvalues_from_probs(&[0.5, 0.1, 0.1, 0.1], 2),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            eigenvalues_from_probs(&[1.0, 0.0], 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let d = [2, 3, 5, 7][rng.random_range(0..4)];
            let p = random_probs(d, &mut rng);
            let back = probs_from_eigenvalues(&eigenvalues_from_probs(&p, d).unwrap(), d);
            for (a, b) in p.iter().zip(&back) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    proptest! {
        #[test]
        fn probs_always_sum_to_one(l in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let p = probs_from_eigenvalues(&l, 3);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_channel_acts_trivially() {
        let m = build_mubs(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::random(3, &mut rng);
        let out = ChannelState::identity(3).apply(&rho, &m).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn single_pinching_dephases_in_its_basis() {
        // Λ = Φ_α alone: λ_α = 1, λ_β = 0 otherwise.
        let d = 3;
        let m = build_mubs(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = DensityMatrix::random(d, &mut rng);
        for alpha in 1..=d + 1 {
            let mut ev = vec![0.0; d + 1];
            ev[alpha - 1] = 1.0;
            let ch = ChannelState::from_eigenvalues(d, ev).unwrap();
            assert!(ch.is_completely_positive());
            let out = ch.apply(&rho, &m).unwrap();
            let ps = m.projectors(alpha);
            for k in 0..d {
                for l in 0..d {
                    if k != l {
                        let off = (&ps[k] * out.matrix() * &ps[l]).norm();
                        assert!(off < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn weyl_operators_are_eigenvectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in [2, 3, 5] {
            let m = build_mubs(d).unwrap();
            let u = build_eigenbasis(&m);
            let ch = ChannelState::from_probs(d, &random_probs(d, &mut rng)).unwrap();
            for (alpha, _, op) in u.iter() {
                let out = ch.apply_operator(op, &m).unwrap();
                let expect = op.scale(ch.eigenvalues()[alpha - 1]);
                assert!(linalg::max_abs_diff(&out, &expect) < 1e-12);
            }
        }
    }

    #[test]
    fn unital_and_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [2, 3, 5] {
            let m = build_mubs(d).unwrap();
            for _ in 0..50 {
                let ch = ChannelState::from_probs(d, &random_probs(d, &mut rng)).unwrap();
                let mixed = DensityMatrix::maximally_mixed(d);
                let out = ch.apply(&mixed, &m).unwrap();
                assert!(linalg::max_abs_diff(out.matrix(), mixed.matrix()) < 1e-12);
                let rho = DensityMatrix::random(d, &mut rng);
                let out = ch.apply(&rho, &m).unwrap();
                assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
                DensityMatrix::new(out.into_matrix()).unwrap();
            }
        }
    }

    #[test]
    fn composition_multiplies_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2, 3, 5] {
            let m = build_mubs(d).unwrap();
            for _ in 0..20 {
                let a = ChannelState::from_probs(d, &random_probs(d, &mut rng)).unwrap();
                let b = ChannelState::from_probs(d, &random_probs(d, &mut rng)).unwrap();
                let ab = a.compose(&b).unwrap();
                let rho = DensityMatrix::random(d, &mut rng);
                let seq = a
                    .apply_operator(&b.apply_operator(rho.matrix(), &m).unwrap(), &m)
                    .unwrap();
                let direct = ab.apply_operator(rho.matrix(), &m).unwrap();
                assert!(linalg::max_abs_diff(&seq, &direct) < 1e-12);
            }
        }
    }

    #[test]
    fn identity_choi_is_maximally_entangled() {
        let d = 3;
        let m = build_mubs(d).unwrap();
        let choi = ChannelState::identity(d).choi_matrix(&m).unwrap();
        let ev = linalg::hermitian_eigenvalues(&choi);
        assert!((ev[d * d - 1] - 1.0).abs() < 1e-12);
        assert!(ev[..d * d - 1].iter().all(|e| e.abs() < 1e-12));
        assert!((choi.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    /// Kraus form `p_0 ρ + Σ_α p_α/(d-1) Σ_k U ρ U†` predicts Choi eigenvalues
    /// `p_0` (once) and `p_α/(d-1)` (each `d-1` times).
    #[test]
    fn choi_spectrum_matches_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2, 3, 5] {
            let m = build_mubs(d).unwrap();
            let ch = ChannelState::from_probs(d, &random_probs(d, &mut rng)).unwrap();
            let choi = ch.choi_matrix(&m).unwrap();
            assert!(linalg::is_hermitian(&choi, 1e-12));
            // partial trace over the output factor
            for i in 0..d {
                for j in 0..d {
                    let s: Complex64 = (0..d).map(|a| choi[(i * d + a, j * d + a)]).sum();
                    let expect = if i == j { 1.0 / d as f64 } else { 0.0 };
                    assert!((s - Complex64::new(expect, 0.0)).norm() < 1e-12);
                }
            }
            let mut predicted = vec![ch.probs()[0]];
            for &pa in &ch.probs()[1..] {
                predicted.extend(std::iter::repeat_n(pa / (d as f64 - 1.0), d - 1));
            }
            predicted.sort_by(|a, b| a.total_cmp(b));
            let ev = linalg::hermitian_eigenvalues(&choi);
            for (a, b) in ev.iter().zip(&predicted) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cp_criteria_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in [2, 3, 5] {
            let m = build_mubs(d).unwrap();
            let trials = 1000;
            for _ in 0..trials {
                // eigenvalues in [-1, 1] give both CP and non-CP instances
                let ev: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let ch = ChannelState::from_eigenvalues(d, ev).unwrap();
                let choi = ch.choi_matrix(&m).unwrap();
                let min_ev = linalg::hermitian_eigenvalues(&choi)[0];
                let by_probs = ch.min_prob() >= 0.0;
                let by_choi = min_ev >= -1e-12;
                if ch.min_prob().abs() > 1e-9 {
                    assert_eq!(by_probs, by_choi, "d = {d}, min p = {}", ch.min_prob());
                }
            }
        }
    }

    #[test]
    fn negative_probability_breaks_choi_positivity() {
        let d = 3;
        let m = build_mubs(d).unwrap();
        let p = [0.55, -0.05, 0.2, 0.2, 0.1];
        let ch = ChannelState::from_probs(d, &p).unwrap();
        assert!(!ch.is_completely_positive());
        let min_ev = linalg::hermitian_eigenvalues(&ch.choi_matrix(&m).unwrap())[0];
        assert!(min_ev < 0.0);
        let rho = DensityMatrix::maximally_mixed(d);
        assert!(matches!(
            ch.apply(&rho, &m),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let m = build_mubs(2).unwrap();
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            ChannelState::identity(3).apply(&rho, &m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_validation() {
        let mut bad = linalg::identity(2);
        bad[(0, 0)] = Complex64::new(2.0, 0.0);
        bad[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert!(DensityMatrix::new(bad).is_err());
        assert!(DensityMatrix::new(linalg::identity(2)).is_err());
        assert!(DensityMatrix::new(linalg::identity(2).unscale(2.0)).is_ok());
    }
}
