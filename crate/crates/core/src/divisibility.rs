//! Markovianity classification of mixture dynamics.
//!
//! Three nested properties are reported for a trajectory: CP-divisibility
//! (all `γ_α(t) ≥ 0`), the sufficient P-divisibility condition
//!
//! ```text
//! [d - 2(k-1)] γ_β + [d + 2(k-1)] γ_α ≥ 0      (α negative, β positive, k ≤ (d+1)/2)
//! ```
//!
//! and the necessary P-divisibility condition `μ_α ≥ 0`. For convex
//! combinations of semigroups with a common rate the `t → ∞` limits of these
//! conditions are available in closed form and are folded into the verdict.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mixture::{check_simplex, MixtureSpec};

/// A rate counts as negative below `-RATE_TOLERANCE`.
pub const RATE_TOLERANCE: f64 = 1e-10;
/// `μ_α` counts as violating the necessary condition below `-MU_TOLERANCE`.
pub const MU_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibilityVerdict {
    pub cp_divisible: bool,
    pub p_sufficient: bool,
    pub p_necessary: bool,
    /// 1-based labels of rates negative at every sampled `t > 0`.
    pub eternal_negative_indices: BTreeSet<usize>,
    pub t_grid: Vec<f64>,
}

impl DivisibilityVerdict {
    fn assert_chain(&self) {
        assert!(
            !self.cp_divisible || self.p_sufficient,
            "CP-divisible verdict without the sufficient P condition: {self:?}"
        );
        assert!(
            !self.p_sufficient || self.p_necessary,
            "sufficient P condition without the necessary one: {self:?}"
        );
    }
}

/// Instantaneous check of the sufficient P-divisibility inequality.
pub fn sufficient_condition_holds(gamma: &[f64], tol: f64) -> bool {
    let d = gamma.len() - 1;
    let negative: Vec<usize> = (0..=d).filter(|&a| gamma[a] < -tol).collect();
    let k = negative.len();
    if k == 0 {
        return true;
    }
    if 2 * k > d + 1 {
        return false;
    }
    let (cn, cp) = suf_coefficients(d, k);
    negative.iter().all(|&a| {
        (0..=d)
            .filter(|b| !negative.contains(b))
            .all(|b| cp * gamma[b] + cn * gamma[a] >= -tol)
    })
}

/// `(d + 2(k-1), d - 2(k-1))`: weights of the negative and positive rate.
fn suf_coefficients(d: usize, k: usize) -> (f64, f64) {
    let shift = 2.0 * (k as f64 - 1.0);
    (d as f64 + shift, d as f64 - shift)
}

pub fn classify(spec: &MixtureSpec, grid: &TimeGrid) -> Result<DivisibilityVerdict> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(grid.first() > 0.0) {
        return Err(Error::InvalidGrid(
            "classification grid must start above 0".into(),
        ));
    }
    let d = spec.dim();
    let mut cp = true;
    let mut suf = true;
    let mut nec = true;
    let mut always_negative = vec![true; d + 1];
    for &t in grid.points() {
        let rv = spec.rates_at(t)?;
        if rv.min_gamma() < -RATE_TOLERANCE {
            cp = false;
        }
        if !sufficient_condition_holds(&rv.gamma, RATE_TOLERANCE) {
            suf = false;
        }
        if rv.mu.iter().any(|&m| m < -MU_TOLERANCE) {
            nec = false;
        }
        for (flag, g) in always_negative.iter_mut().zip(&rv.gamma) {
            *flag &= *g < -RATE_TOLERANCE;
        }
    }
    if spec.common_rate().is_some() {
        let x = spec.x();
        let asym = asymptotic_rates(x, d);
        cp &= asym.iter().all(|&g| g >= 0.0);
        suf &= p_region_membership(x, d)?;
        for (flag, g) in always_negative.iter_mut().zip(&asym) {
            *flag &= *g < 0.0;
        }
    }
    let verdict = DivisibilityVerdict {
        cp_divisible: cp,
        p_sufficient: suf,
        p_necessary: nec,
        eternal_negative_indices: (0..=d)
            .filter(|&a| always_negative[a])
            .map(|a| a + 1)
            .collect(),
        t_grid: grid.points().to_vec(),
    };
    verdict.assert_chain();
    Ok(verdict)
}

/// Sign carriers of `γ_α(t)` as `t → ∞` for `Σ_α x_α exp(rtL_α)`.
///
/// With all `x > 0` the rates decay like `e^{-rt}` with coefficients
/// proportional to `(1/d)[Σ_β 1/x_β - d/x_α - 1]`. With `z ≥ 1` zero weights
/// the rates tend to `z/d - 1` (zero components) and `z/d` (the others).
/// Values within relative rounding of zero are snapped to 0.
pub fn asymptotic_rates(x: &[f64], d: usize) -> Vec<f64> {
    let zeros = x.iter().filter(|&&v| v == 0.0).count();
    if zeros > 0 {
        let z = zeros as f64 / d as f64;
        return x
            .iter()
            .map(|&v| if v == 0.0 { z - 1.0 } else { z })
            .collect();
    }
    let inv_sum: f64 = x.iter().map(|v| 1.0 / v).sum();
    let tol = 1e-12 * inv_sum;
    x.iter()
        .map(|&v| {
            let g = inv_sum - d as f64 / v - 1.0;
            if g.abs() <= tol {
                0.0
            } else {
                g / d as f64
            }
        })
        .collect()
}

/// Left-hand side of the CP-region inequality, multiplied out:
/// `(Π_ν x_ν)[Σ_β 1/x_β - d/x_α - 1]` for label `alpha` (1-based).
pub fn cp_margin(x: &[f64], d: usize, alpha: usize) -> f64 {
    let prod_except = |skip: usize| -> f64 {
        x.iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, v)| v)
            .product()
    };
    let all: f64 = x.iter().product();
    let sum_terms: f64 = (0..x.len()).map(prod_except).sum();
    sum_terms - d as f64 * prod_except(alpha - 1) - all
}

/// Whether the semigroup mixture with weights `x` is CP-divisible, i.e.
/// every `γ_α(t) ≥ 0` for all `t`. Points with zero weights are
/// CP-divisible only at the simplex vertices.
pub fn cp_region_membership(x: &[f64], d: usize) -> Result<bool> {
    check_simplex(x, d + 1)?;
    Ok(asymptotic_rates(x, d).iter().all(|&g| g >= 0.0))
}

/// A point on the d = 3 CP border from the four-branch closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub branch: u8,
    pub x4: f64,
}

/// Four-branch closed form for `x_4` on the border of the d = 3 CP region.
/// Branch domains are tested in order; the first match wins.
pub fn cp_boundary_d3(x1: f64, x2: f64, x3: f64) -> Result<BoundaryPoint> {
    let out = || Error::OutOfBranchDomain { x1, x2, x3 };
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    if !(unit(x1) && unit(x2) && unit(x3)) {
        return Err(out());
    }
    let p = x1 * x2 * x3;
    let (a, b, c) = (x1 * x2, x1 * x3, x2 * x3);
    let branch = if x2 <= x3 && x1 >= c / (-x2 + x3 + c) {
        (1, -a + b - c + 2.0 * p)
    } else if x1 <= c / (x2 + x3 - c) {
        (2, -a - b + c + 2.0 * p)
    } else if x3 <= x2 && x1 >= c / (x2 - x3 + c) {
        (3, a - b - c + 2.0 * p)
    } else {
        (4, a + b + c - 2.0 * p)
    };
    let x4 = p / branch.1;
    if !x4.is_finite() {
        return Err(out());
    }
    Ok(BoundaryPoint {
        branch: branch.0,
        x4,
    })
}

/// Bracket of the asymptotic sufficient P-region inequality for the pair
/// (`alpha` negative, `beta` positive), 1-based labels, all `x > 0`:
/// `Σ_μ 1/x_μ - [d+2(k-1)]/(2x_α) - [d-2(k-1)]/(2x_β) - 1`.
pub fn p_margin(x: &[f64], d: usize, k: usize, alpha: usize, beta: usize) -> f64 {
    let (cn, cp) = suf_coefficients(d, k);
    let inv_sum: f64 = x.iter().map(|v| 1.0 / v).sum();
    inv_sum - cn / (2.0 * x[alpha - 1]) - cp / (2.0 * x[beta - 1]) - 1.0
}

/// Sufficient P-region inequality with `k` negative rates; the negative
/// set is the `k` most negative asymptotic rates at `x`.
pub fn ee_condition(x: &[f64], d: usize, k: usize) -> Result<bool> {
    check_simplex(x, d + 1)?;
    let max_k = d.div_ceil(2);
    if k == 0 || k > max_k {
        return Err(Error::InvalidK { k, max: max_k });
    }
    let asym = asymptotic_rates(x, d);
    let mut order: Vec<usize> = (0..=d).collect();
    order.sort_by(|&a, &b| asym[a].total_cmp(&asym[b]));
    let (negative, positive) = order.split_at(k);
    if x.contains(&0.0) {
        let (cn, cp) = suf_coefficients(d, k);
        return Ok(negative.iter().all(|&a| {
            positive
                .iter()
                .all(|&b| cp * asym[b] + cn * asym[a] >= -1e-12)
        }));
    }
    let inv_sum: f64 = x.iter().map(|v| 1.0 / v).sum();
    let tol = 1e-12 * inv_sum;
    Ok(negative.iter().all(|&a| {
        positive
            .iter()
            .all(|&b| p_margin(x, d, k, a + 1, b + 1) >= -tol)
    }))
}

/// Asymptotic sufficient P-divisibility with `k` inferred from the sign
/// pattern of the asymptotic rates.
pub fn p_region_membership(x: &[f64], d: usize) -> Result<bool> {
    check_simplex(x, d + 1)?;
    let k = asymptotic_rates(x, d).iter().filter(|&&g| g < 0.0).count();
    if k == 0 {
        return Ok(true);
    }
    if 2 * k > d + 1 {
        return Ok(false);
    }
    ee_condition(x, d, k)
}

/// Which verdict a region query selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionMode {
    Cp,
    PSufficient,
    PNecessary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPoint {
    pub x: Vec<f64>,
    pub cp: bool,
    pub p_sufficient: bool,
    pub p_necessary: bool,
    pub eternal_negative_indices: BTreeSet<usize>,
    pub coords: Vec<f64>,
}

impl RegionPoint {
    pub fn is_member(&self, mode: RegionMode) -> bool {
        match mode {
            RegionMode::Cp => self.cp,
            RegionMode::PSufficient => self.p_sufficient,
            RegionMode::PNecessary => self.p_necessary,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionGrid {
    pub dim: usize,
    pub resolution: usize,
    pub rate: f64,
    pub points: Vec<RegionPoint>,
}

impl RegionGrid {
    pub fn members(&self, mode: RegionMode) -> impl Iterator<Item = &RegionPoint> {
        self.points.iter().filter(move |p| p.is_member(mode))
    }
}

/// Classifies one semigroup mixture point on the certification grid.
pub fn classify_point(x: &[f64], d: usize, r: f64) -> Result<RegionPoint> {
    let spec = MixtureSpec::semigroup(d, x.to_vec(), r)?;
    let v = classify(&spec, &TimeGrid::certification(r))?;
    Ok(RegionPoint {
        x: x.to_vec(),
        cp: v.cp_divisible,
        p_sufficient: v.p_sufficient,
        p_necessary: v.p_necessary,
        eternal_negative_indices: v.eternal_negative_indices,
        coords: simplex_coords(x),
    })
}

/// Barycentric grid over the d = 3 simplex with `resolution` points per
/// edge (`x_4 = 1 - x_1 - x_2 - x_3`), each classified at rate `r`. The
/// uniform point is appended when the lattice misses it.
pub fn scan_region(d: usize, resolution: usize, r: f64) -> Result<RegionGrid> {
    if d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    if resolution < 11 {
        return Err(Error::InvalidResolution(resolution));
    }
    let n = resolution - 1;
    let mut xs = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            for k in 0..=n - i - j {
                let l = n - i - j - k;
                xs.push([i, j, k, l].map(|c| c as f64 / n as f64).to_vec());
            }
        }
    }
    if !n.is_multiple_of(4) {
        // keep the barycenter in every scan
        xs.push(vec![0.25; 4]);
    }
    let points = xs
        .par_iter()
        .map(|x| classify_point(x, d, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionGrid {
        dim: d,
        resolution,
        rate: r,
        points,
    })
}

/// Re-classifies an explicit list of points (e.g. read back from CSV).
pub fn classify_points(points: &[Vec<f64>], d: usize, r: f64) -> Result<Vec<RegionPoint>> {
    points.par_iter().map(|x| classify_point(x, d, r)).collect()
}

/// Isometric simplex coordinates:
/// `x'_α = [α x_{α+1} - Σ_{β≤α} x_β] / √(α(α+1))`, `x'_{d+1} = 1/√(d+1)`.
pub fn simplex_coords(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut partial = 0.0;
    for alpha in 1..n {
        partial += x[alpha - 1];
        let a = alpha as f64;
        out.push((a * x[alpha] - partial) / (a * (a + 1.0)).sqrt());
    }
    out.push(1.0 / (n as f64).sqrt());
    out
}

/// Eigenvalues `λ_α(t)/λ_α(s)` of the propagator `V(t, s)`.
pub fn propagator_eigenvalues(spec: &MixtureSpec, s: f64, t: f64) -> Result<Vec<f64>> {
    if !(0.0 <= s && s <= t) {
        return Err(Error::PreconditionUnmet(format!(
            "need 0 <= s <= t, got s = {s}, t = {t}"
        )));
    }
    let at_s = spec.eigenvalues_at(s)?;
    let at_t = spec.eigenvalues_at(t)?;
    if let Some(v) = at_s.iter().find(|v| v.abs() < 1e-14) {
        return Err(Error::SingularIntermediateMap { s, value: v.abs() });
    }
    Ok(at_t.iter().zip(&at_s).map(|(a, b)| a / b).collect())
}
