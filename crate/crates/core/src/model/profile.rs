use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Density sampled on a uniform grid over [0,1], endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl DensityProfile {
    pub fn uniform_grid(n_cells: usize) -> Vec<f64> {
        (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect()
    }

    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Structure(format!(
                "grid of length {} with {} values",
                grid.len(),
                values.len()
            )));
        }
        let n = grid.len() - 1;
        if grid[0] != 0.0 || grid[n] != 1.0 {
            return Err(Error::Structure("grid must start at 0 and end at 1".into()));
        }
        let h = 1.0 / n as f64;
        for (i, w) in grid.windows(2).enumerate() {
            if !(w[1] > w[0]) || ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                return Err(Error::Structure(format!("grid not uniform near index {i}")));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < -0.1 || **v > 1.1) {
            return Err(Error::Parameter(format!("profile value {v} outside [-0.1, 1.1]")));
        }
        Ok(DensityProfile { grid, values })
    }

    /// Values on the uniform grid with `values.len() - 1` cells.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let n = values.len().saturating_sub(1).max(1);
        Self::new(Self::uniform_grid(n), values)
    }

    pub fn from_fn(n_cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = Self::uniform_grid(n_cells);
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_parts_unchecked(grid: Vec<f64>, values: Vec<f64>) -> Self {
        DensityProfile { grid, values }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_cells(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells() as f64
    }

    /// Piecewise-linear interpolation.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.n_cells();
        let s = (x.clamp(0.0, 1.0) * n as f64).min(n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let t = s - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn resample(&self, n_cells: usize) -> DensityProfile {
        if n_cells == self.n_cells() {
            return self.clone();
        }
        let grid = Self::uniform_grid(n_cells);
        let values = grid.iter().map(|&x| self.interpolate(x)).collect();
        DensityProfile { grid, values }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn sup_distance(a: &DensityProfile, b: &DensityProfile) -> Result<f64> {
    if a.grid.len() != b.grid.len() {
        return Err(Error::Structure(format!(
            "grid sizes differ: {} vs {}",
            a.grid.len(),
            b.grid.len()
        )));
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_distance_of_shift() {
        let a = DensityProfile::from_fn(10, |x| 0.3 + 0.2 * x).unwrap();
        let b = DensityProfile::from_fn(10, |x| 0.35 + 0.2 * x).unwrap();
        assert_eq!(sup_distance(&a, &a).unwrap(), 0.0);
        assert!((sup_distance(&a, &b).unwrap() - 0.05).abs() < 1e-14);
        let c = DensityProfile::from_fn(12, |_| 0.5).unwrap();
        assert!(matches!(sup_distance(&a, &c), Err(Error::Structure(_))));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(DensityProfile::new(vec![0.0, 0.4, 1.0], vec![0.1, 0.2, 0.3]).is_err());
        assert!(DensityProfile::new(vec![0.0, 0.5, 1.0], vec![0.1, 2.0, 0.3]).is_err());
        assert!(DensityProfile::new(vec![0.0, 0.5, 1.0], vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_lines() {
        let p = DensityProfile::from_fn(8, |x| 0.1 + 0.5 * x).unwrap();
        for &x in &[0.0, 0.13, 0.5, 0.97, 1.0] {
            assert!((p.interpolate(x) - (0.1 + 0.5 * x)).abs() < 1e-14);
        }
        let q = p.resample(32);
        assert!((q.values()[16] - 0.35).abs() < 1e-14);
    }
}
