//! Small dense linear-algebra helpers shared by the channel, oracle and
//! classical modules.
//!
//! Superoperators use column-stacking vectorization throughout:
//! `vec(X)[i + j*d] = X[i, j]`, so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn outer(u: &DVector<Complex64>, v: &DVector<Complex64>) -> CMatrix {
    u * v.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<Complex64>, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    (a.adjoint() * b).trace()
}

/// Eigenvalues of a Hermitian matrix, ascending. The input is symmetrized
/// first so tiny anti-Hermitian rounding does not leak into the solver.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Trace norm `Tr sqrt(X X†)` from singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// Numerical rank of a Hermitian PSD matrix (eigenvalues above `tol`).
pub fn psd_rank(m: &CMatrix, tol: f64) -> usize {
    hermitian_eigenvalues(m)
        .iter()
        .filter(|&&e| e > tol)
        .count()
}

/// Random density matrix `G G† / Tr(G G†)` with Gaussian `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// Random point on the probability simplex of the given length
/// (normalized exponential variates, i.e. uniform on the simplex).
pub fn random_simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn primes() {
        let p: Vec<usize> = (0..20).filter(|&n| is_prime(n)).collect();
        assert_eq!(p, vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn vectorization_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density_matrix(3, &mut rng);
        let b = random_density_matrix(3, &mut rng);
        let x = random_density_matrix(3, &mut rng);
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(max_abs_diff(&unvectorize(&vectorize(&x), 3), &x) == 0.0);
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3, 5] {
            let rho = random_density_matrix(d, &mut rng);
            assert!(is_hermitian(&rho, 1e-12));
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!(hermitian_eigenvalues(&rho)[0] > -1e-12);
            // trace norm of a state is its trace
            assert!((trace_norm(&rho) - 1.0).abs() < 1e-10);
        }
        let x = random_simplex_point(5, &mut rng);
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(x.iter().all(|&v| v >= 0.0));
    }
}
