//! Discretized trajectories with decomposition bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{ArbError, Result};
use crate::paths::grid::TimeGrid;

/// Cumulative local time accumulated at one level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalTimeTrack {
    pub level: f64,
    /// Cumulative local time at each grid point; nondecreasing.
    pub cumulative: Vec<f64>,
}

/// A simulated trajectory together with its semimartingale bookkeeping:
/// driver (Brownian) increments, the cumulative singular component and its
/// total variation, local-time tracks, and optional overlays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: TimeGrid,
    /// Price levels at grid points; length `n_steps + 1`.
    pub values: Vec<f64>,
    /// Brownian increments of the martingale driver; length `n_steps`.
    pub driver_increments: Vec<f64>,
    /// Cumulative singular component `kappa_t`; length `n_steps + 1`.
    pub kappa: Vec<f64>,
    /// Cumulative total variation `|kappa|_t`; nondecreasing.
    pub kappa_var: Vec<f64>,
    /// Local-time tracks carried by the construction.
    pub local_times: Vec<LocalTimeTrack>,
    /// Future-infimum overlay `J_t`, when filled.
    pub future_inf: Option<Vec<f64>>,
    /// Index of absorption at 0; values are identically 0 from there on.
    pub absorbed_at: Option<usize>,
    /// Index of a model-declared strong-arbitrage marker (for constructions
    /// that detect one, e.g. the first-passage time of the Williams path).
    pub singular_marker: Option<usize>,
}

impl SamplePath {
    /// Empty bookkeeping skeleton for `grid`, initial value `s0`.
    pub fn with_capacity(grid: TimeGrid, s0: f64) -> Self {
        let n = grid.n_points();
        let mut values = Vec::with_capacity(n);
        values.push(s0);
        SamplePath {
            grid,
            values,
            driver_increments: Vec::with_capacity(n - 1),
            kappa: {
                let mut k = Vec::with_capacity(n);
                k.push(0.0);
                k
            },
            kappa_var: {
                let mut k = Vec::with_capacity(n);
                k.push(0.0);
                k
            },
            local_times: Vec::new(),
            future_inf: None,
            absorbed_at: None,
            singular_marker: None,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps()
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("nonempty path")
    }

    /// Check the structural invariants.
    ///
    /// Value nonnegativity is model-specific (Bachelier-type models live on
    /// all of R) and is not enforced here.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n_points();
        if self.values.len() != n || self.kappa.len() != n || self.kappa_var.len() != n {
            return Err(ArbError::Structural("track lengths disagree with grid".into()));
        }
        if self.driver_increments.len() != n - 1 {
            return Err(ArbError::Structural("driver increment count mismatch".into()));
        }
        for w in self.kappa_var.windows(2) {
            if w[1] < w[0] - 1e-12 {
                return Err(ArbError::Structural("kappa_var must be nondecreasing".into()));
            }
        }
        for (i, (&kv, &k)) in self.kappa_var.iter().zip(self.kappa.iter()).enumerate() {
            if kv + 1e-9 < (k - self.kappa[0]).abs() {
                return Err(ArbError::Structural(format!(
                    "|kappa| dominated by |kappa_t - kappa_0| at index {i}"
                )));
            }
        }
        for track in &self.local_times {
            if track.cumulative.len() != n {
                return Err(ArbError::Structural("local-time track length mismatch".into()));
            }
            for w in track.cumulative.windows(2) {
                if w[1] < w[0] - 1e-12 {
                    return Err(ArbError::Structural("local time must be nondecreasing".into()));
                }
            }
        }
        if let Some(a) = self.absorbed_at {
            for (i, &v) in self.values.iter().enumerate().skip(a) {
                if v != 0.0 {
                    return Err(ArbError::Structural(format!(
                        "nonzero value {v} after absorption at index {i}"
                    )));
                }
            }
            for &d in self.driver_increments.iter().skip(a) {
                if d != 0.0 {
                    return Err(ArbError::Structural("driver increment after absorption".into()));
                }
            }
        }
        if let Some(j) = &self.future_inf {
            if j.len() != n {
                return Err(ArbError::Structural("future_inf length mismatch".into()));
            }
            for w in j.windows(2) {
                if w[1] < w[0] - 1e-12 {
                    return Err(ArbError::Structural("future_inf must be nondecreasing".into()));
                }
            }
            for (ji, vi) in j.iter().zip(self.values.iter()) {
                if ji > &(vi + 1e-9) {
                    return Err(ArbError::Structural("future_inf exceeds path value".into()));
                }
            }
        }
        Ok(())
    }
}
