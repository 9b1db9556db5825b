//! Uniform time grid.

use serde::{Deserialize, Serialize};

use crate::error::{ArbError, Result};

/// Uniform discretization of `[t_start, t_end]` into `n_steps` intervals.
/// Times are in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(ArbError::Parameter("grid endpoints must be finite".into()));
        }
        if t_end <= t_start {
            return Err(ArbError::Parameter(format!(
                "t_end ({t_end}) must exceed t_start ({t_start})"
            )));
        }
        if n_steps == 0 {
            return Err(ArbError::Parameter("n_steps must be at least 1".into()));
        }
        Ok(Self { t_start, t_end, n_steps })
    }

    /// Grid over `[0, horizon]` with time step near `dt`.
    pub fn from_horizon(horizon: f64, dt: f64) -> Result<Self> {
        if dt <= 0.0 {
            return Err(ArbError::Parameter("dt must be positive".into()));
        }
        let n = (horizon / dt).round().max(1.0) as usize;
        Self::new(0.0, horizon, n)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t_start + self.dt() * i as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points()).map(|i| self.time_at(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(1.0, 0.5, 10).is_err());
    }

    #[test]
    fn dt_and_times() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert!((g.dt() - 0.25).abs() < 1e-15);
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
