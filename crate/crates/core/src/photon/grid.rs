use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_GRID_POINTS: usize = 8;

/// Uniform frequency grid, inclusive of both end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n_points: usize,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl FrequencyGrid {
    pub fn new(n_points: usize, omega_min: f64, omega_max: f64) -> Result<Self> {
        if n_points < MIN_GRID_POINTS {
            return Err(Error::Validation(format!(
                "frequency grid needs at least {MIN_GRID_POINTS} points, got {n_points}"
            )));
        }
        if !(omega_max > omega_min) || !omega_min.is_finite() || !omega_max.is_finite() {
            return Err(Error::Validation(format!(
                "frequency grid bounds [{omega_min}, {omega_max}] are not an increasing finite interval"
            )));
        }
        Ok(FrequencyGrid { n_points, omega_min, omega_max })
    }

    /// Grid centred on `center` with the given spacing.
    pub fn centered(n_points: usize, center: f64, spacing: f64) -> Result<Self> {
        let half = spacing * (n_points as f64 - 1.0) / 2.0;
        Self::new(n_points, center - half, center + half)
    }

    pub fn spacing(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n_points as f64 - 1.0)
    }

    pub fn point(&self, k: usize) -> f64 {
        self.omega_min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    pub fn span(&self) -> f64 {
        self.omega_max - self.omega_min
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.omega_min && omega <= self.omega_max
    }
}

/// Uniform time grid `t_j = t0 + j dt`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || n < 2 {
            return Err(Error::Validation(format!(
                "time grid needs dt > 0 and at least two points (dt = {dt}, n = {n})"
            )));
        }
        Ok(TimeGrid { t0, dt, n })
    }

    /// Grid covering `[start, end]` with spacing at most `dt`, end points included.
    pub fn covering(start: f64, end: f64, dt: f64) -> Result<Self> {
        if !(end > start) {
            return Err(Error::Validation(format!("empty time window [{start}, {end}]")));
        }
        let n = ((end - start) / dt).ceil() as usize + 1;
        let n = n.max(2);
        TimeGrid::new(start, (end - start) / (n as f64 - 1.0), n)
    }

    pub fn point(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    pub fn end(&self) -> f64 {
        self.point(self.n - 1)
    }

    /// Trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.dt; self.n];
        w[0] *= 0.5;
        w[self.n - 1] *= 0.5;
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_exact() {
        let g = FrequencyGrid::new(11, 1.0, 2.0).unwrap();
        assert_eq!(g.spacing(), (2.0 - 1.0) / 10.0);
        assert_eq!(g.point(10), 2.0);
    }

    #[test]
    fn rejects_small_or_inverted_grids() {
        assert!(FrequencyGrid::new(7, 0.0, 1.0).is_err());
        assert!(FrequencyGrid::new(16, 1.0, 1.0).is_err());
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
    }

    #[test]
    fn covering_includes_endpoints() {
        let g = TimeGrid::covering(-1.0, 2.0, 0.07).unwrap();
        assert!((g.end() - 2.0).abs() < 1e-12);
        assert!(g.dt <= 0.07);
        let total: f64 = g.trapezoid_weights().iter().sum();
        assert!((total - 3.0).abs() < 1e-12);
    }
}
