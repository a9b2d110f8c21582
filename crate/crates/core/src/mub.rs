//! Maximal sets of mutually unbiased bases for prime dimension and the
//! unitary operator basis that diagonalizes every generalized Pauli channel.
//!
//! Storage order of the `d + 1` bases: index 0 is the computational basis,
//! index `a + 1` (for `a = 0..d`) is the Fourier-type basis with quadratic
//! phase `ω^{a j²}`. Channel labels `α = 1..=d+1` map onto storage indices
//! as `α mod (d + 1)`, so the last label is the computational basis. For a
//! qubit this reproduces the usual Pauli labelling (σ₁, σ₂, σ₃).

use nalgebra::DVector;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// The `d + 1` mutually unbiased bases of a prime-dimensional space.
#[derive(Debug, Clone)]
pub struct MubSet {
    dim: usize,
    bases: Vec<Vec<DVector<Complex64>>>,
    projectors: Vec<Vec<CMatrix>>,
}

pub fn build_mubs(d: usize) -> Result<MubSet> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if !linalg::is_prime(d) {
        return Err(Error::NonPrimeDimension(d));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let mut bases = Vec::with_capacity(d + 1);
    bases.push(
        (0..d)
            .map(|k| {
                let mut v = DVector::from_element(d, linalg::ZERO);
                v[k] = linalg::ONE;
                v
            })
            .collect(),
    );
    for a in 0..d {
        let basis = (0..d)
            .map(|k| {
                DVector::from_fn(d, |j, _| {
                    let phase = if d == 2 {
                        // i^{a j²} (-1)^{k j}
                        0.25 * (a * j * j) as f64 + 0.5 * (k * j) as f64
                    } else {
                        ((a * j * j + k * j) % d) as f64 / d as f64
                    };
                    Complex64::from_polar(norm, TAU * phase)
                })
            })
            .collect();
        bases.push(basis);
    }
    let projectors = bases
        .iter()
        .map(|b: &Vec<DVector<Complex64>>| b.iter().map(|v| linalg::outer(v, v)).collect())
        .collect();
    Ok(MubSet {
        dim: d,
        bases,
        projectors,
    })
}

impl MubSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_bases(&self) -> usize {
        self.dim + 1
    }

    /// Storage index of channel label `alpha` (1-based).
    pub fn storage_index(&self, alpha: usize) -> usize {
        assert!(
            (1..=self.dim + 1).contains(&alpha),
            "channel label {alpha} out of range"
        );
        alpha % (self.dim + 1)
    }

    /// Basis vectors by storage index (0 = computational).
    pub fn basis(&self, index: usize) -> &[DVector<Complex64>] {
        &self.bases[index]
    }

    /// Rank-1 projectors `P_k` of the basis carrying channel label `alpha`.
    pub fn projectors(&self, alpha: usize) -> &[CMatrix] {
        &self.projectors[self.storage_index(alpha)]
    }

    /// Projector pinching `Φ_α[X] = Σ_k P_k X P_k`.
    pub fn pinch(&self, alpha: usize, x: &CMatrix) -> CMatrix {
        self.projectors(alpha)
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, p| acc + p * x * p)
    }

    /// Largest deviation from orthonormality within each basis and from
    /// `|<ψ|φ>|² = 1/d` across bases.
    pub fn unbiasedness_error(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for (a, ba) in self.bases.iter().enumerate() {
            for (b, bb) in self.bases.iter().enumerate() {
                for (k, u) in ba.iter().enumerate() {
                    for (l, v) in bb.iter().enumerate() {
                        let ov = u.dotc(v);
                        let err = if a == b {
                            let target = if k == l { 1.0 } else { 0.0 };
                            (ov - Complex64::new(target, 0.0)).norm()
                        } else {
                            (ov.norm_sqr() - 1.0 / d as f64).abs()
                        };
                        worst = worst.max(err);
                    }
                }
            }
        }
        worst
    }

    /// Largest deviation of `Σ_k P_k` from the identity over all bases.
    pub fn completeness_error(&self) -> f64 {
        let id = linalg::identity(self.dim);
        self.projectors
            .iter()
            .map(|ps| {
                let sum = ps
                    .iter()
                    .fold(CMatrix::zeros(self.dim, self.dim), |acc, p| acc + p);
                linalg::max_abs_diff(&sum, &id)
            })
            .fold(0.0, f64::max)
    }
}

/// Operators `U_α^k = Σ_l ω^{kl} P_l^{(α)}`, `α = 1..=d+1`, `k = 1..d-1`.
#[derive(Debug, Clone)]
pub struct WeylEigenbasis {
    dim: usize,
    omega: Complex64,
    ops: Vec<Vec<CMatrix>>,
}

pub fn build_eigenbasis(m: &MubSet) -> WeylEigenbasis {
    let d = m.dim();
    let omega = Complex64::from_polar(1.0, TAU / d as f64);
    let ops = (1..=d + 1)
        .map(|alpha| {
            (1..d)
                .map(|k| {
                    m.projectors(alpha)
                        .iter()
                        .enumerate()
                        .fold(CMatrix::zeros(d, d), |acc, (l, p)| {
                            acc + p * omega.powu(((k * l) % d) as u32)
                        })
                })
                .collect()
        })
        .collect();
    WeylEigenbasis { dim: d, omega, ops }
}

impl WeylEigenbasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    /// `U_α^k` with 1-based `alpha` and `k`.
    pub fn operator(&self, alpha: usize, k: usize) -> &CMatrix {
        &self.ops[alpha - 1][k - 1]
    }

    /// All `(α, k, U_α^k)` triples.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &CMatrix)> {
        self.ops
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().enumerate().map(move |(k, u)| (a + 1, k + 1, u)))
    }

    /// Hilbert–Schmidt Gram matrix of `{1} ∪ {U_α^k}` (size `d² × d²`).
    pub fn gram_matrix(&self) -> CMatrix {
        let mut all = vec![linalg::identity(self.dim)];
        all.extend(self.iter().map(|(_, _, u)| u.clone()));
        let n = all.len();
        CMatrix::from_fn(n, n, |i, j| linalg::hs_inner(&all[i], &all[j]))
    }
}
