use serde::Serialize;

use crate::error::{Error, Result};

/// Increasing sequence of sample times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if let Some(t) = points.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "time {t} is negative or not finite"
            )));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// `n` evenly spaced points on `[start, stop]`.
    pub fn linear(start: f64, stop: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        if n == 1 {
            return Self::from_points(vec![start]);
        }
        let step = (stop - start) / (n - 1) as f64;
        Self::from_points((0..n).map(|i| start + step * i as f64).collect())
    }

    /// `n` log-spaced points on `[start, stop]`, `start > 0`.
    pub fn log(start: f64, stop: f64, n: usize) -> Result<Self> {
        if !(start > 0.0) {
            return Err(Error::InvalidGrid("log grid must start above 0".into()));
        }
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        if n == 1 {
            return Self::from_points(vec![start]);
        }
        let ratio = (stop / start).ln();
        Self::from_points(
            (0..n)
                .map(|i| start * (ratio * i as f64 / (n - 1) as f64).exp())
                .collect(),
        )
    }

    /// 200 log-spaced points on `[1e-3/r, 1e3/r]`, the grid used to certify
    /// sign patterns "for all t".
    pub fn certification(r: f64) -> Self {
        Self::log(1e-3 / r, 1e3 / r, 200).expect("valid certification grid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors() {
        let g = TimeGrid::linear(0.0, 5.0, 101).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g.first(), 0.0);
        assert!((g.last() - 5.0).abs() < 1e-14);
        let g = TimeGrid::log(1e-3, 1e3, 7).unwrap();
        assert!((g.points()[3] - 1.0).abs() < 1e-12);
        let g = TimeGrid::certification(3.0);
        assert_eq!(g.len(), 200);
        assert!((g.last() - 1e3 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(TimeGrid::from_points(vec![]).unwrap_err(), Error::EmptyGrid);
        assert!(TimeGrid::from_points(vec![1.0, 1.0]).is_err());
        assert!(TimeGrid::from_points(vec![-1.0, 1.0]).is_err());
        assert!(TimeGrid::log(0.0, 1.0, 4).is_err());
        assert!(TimeGrid::linear(0.0, 1.0, 0).is_err());
    }
}
