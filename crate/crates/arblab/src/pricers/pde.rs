//! Crank–Nicolson solver for the driftless barrier PDE
//! `C_tau = 1/2 sigma^2 s^2 C_ss` on `[b, s_max]`, absorbing at the barrier.
//!
//! Theta = 1/2 with a Rannacher startup (the first step is taken as two
//! implicit half-steps) to damp the payoff kink. The zero-curvature condition
//! at `s_max` makes the spatial operator vanish there, so the far-field row
//! stays frozen at its terminal value.

use serde::{Deserialize, Serialize};

use crate::error::{ArbError, Result};
use crate::math::tridiag::solve_tridiagonal;

/// Spatial/temporal resolution for the barrier PDE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub n_space: usize,
    pub n_time: usize,
}

impl PdeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_min < self.s_max) {
            return Err(ArbError::Parameter("need s_min < s_max".into()));
        }
        if self.n_space < 3 || self.n_time < 1 {
            return Err(ArbError::Parameter("grid too small".into()));
        }
        Ok(())
    }
}

/// Price surface `C(tau, s)` on the tensor grid.
#[derive(Debug, Clone)]
pub struct PdeSurface {
    pub s_nodes: Vec<f64>,
    pub taus: Vec<f64>,
    /// `rows[k][i] = C(taus[k], s_nodes[i])`; `rows[0]` is the terminal slice.
    pub rows: Vec<Vec<f64>>,
}

impl PdeSurface {
    /// Interpolated value at time-to-maturity `tau` (nearest tau level) and
    /// spot `s` (linear in space).
    pub fn value(&self, tau: f64, s: f64) -> Result<f64> {
        let dtau = self.taus[1] - self.taus[0];
        let k = ((tau - self.taus[0]) / dtau).round() as isize;
        if k < 0 || k as usize >= self.taus.len() {
            return Err(ArbError::Domain(format!("tau {tau} outside surface")));
        }
        let k = k as usize;
        if (self.taus[k] - tau).abs() > 0.5 * dtau + 1e-12 {
            return Err(ArbError::Domain(format!("tau {tau} not on surface grid")));
        }
        let row = &self.rows[k];
        let s0 = self.s_nodes[0];
        let ds = self.s_nodes[1] - self.s_nodes[0];
        if s < s0 - 1e-12 || s > *self.s_nodes.last().unwrap() + 1e-12 {
            return Err(ArbError::Domain(format!("spot {s} outside surface")));
        }
        let pos = ((s - s0) / ds).clamp(0.0, (self.s_nodes.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.s_nodes.len() - 2);
        let w = pos - i as f64;
        Ok(row[i] * (1.0 - w) + row[i + 1] * w)
    }

    /// The barrier-row values across time slices.
    pub fn boundary_row(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn terminal_slice(&self) -> &[f64] {
        &self.rows[0]
    }
}

/// Solve the down-and-out call PDE with terminal payoff `(s - strike)_+`,
/// absorbing boundary `C(tau, b) = 0`, out to time-to-maturity `t_max`.
///
/// The grid's lower edge must sit exactly on the barrier.
pub fn pde_barrier_solve(
    grid: &PdeGrid,
    b: f64,
    strike: f64,
    sigma: f64,
    t_max: f64,
) -> Result<PdeSurface> {
    grid.validate()?;
    if (grid.s_min - b).abs() > 1e-12 * (1.0 + b.abs()) {
        return Err(ArbError::Parameter(format!(
            "grid must start on the barrier: s_min={}, b={b}",
            grid.s_min
        )));
    }
    if sigma == 0.0 || t_max <= 0.0 {
        return Err(ArbError::Parameter("need sigma != 0 and t_max > 0".into()));
    }
    let n = grid.n_space;
    let m = grid.n_time;
    let ds = (grid.s_max - grid.s_min) / n as f64;
    let dtau = t_max / m as f64;
    let s_nodes: Vec<f64> = (0..=n).map(|i| grid.s_min + ds * i as f64).collect();
    let taus: Vec<f64> = (0..=m).map(|k| dtau * k as f64).collect();

    // spatial operator coefficient a_i = 1/2 sigma^2 s_i^2 / ds^2 on interior
    let a: Vec<f64> = s_nodes.iter().map(|s| 0.5 * sigma * sigma * s * s / (ds * ds)).collect();

    let mut rows = Vec::with_capacity(m + 1);
    let terminal: Vec<f64> = s_nodes.iter().map(|s| (s - strike).max(0.0)).collect();
    rows.push(terminal);

    let far_value = (grid.s_max - strike).max(0.0);

    // one theta-step of size dt from `prev`
    let step = |prev: &[f64], theta: f64, dt: f64| -> Result<Vec<f64>> {
        let len = n + 1;
        let mut sub = vec![0.0; len];
        let mut diag = vec![1.0; len];
        let mut sup = vec![0.0; len];
        let mut rhs = vec![0.0; len];
        rhs[0] = 0.0; // absorbing barrier
        rhs[n] = far_value; // zero-curvature far field
        for i in 1..n {
            let ai = a[i] * dt;
            // explicit part
            let expl = if theta < 1.0 {
                let lap = prev[i - 1] - 2.0 * prev[i] + prev[i + 1];
                prev[i] + (1.0 - theta) * ai * lap
            } else {
                prev[i]
            };
            sub[i] = -theta * ai;
            diag[i] = 1.0 + 2.0 * theta * ai;
            sup[i] = -theta * ai;
            rhs[i] = expl;
        }
        solve_tridiagonal(&sub, &diag, &sup, &rhs)
    };

    let mut prev = rows[0].clone();
    for k in 0..m {
        let next = if k == 0 {
            // Rannacher startup: two implicit half-steps
            let half = step(&prev, 1.0, 0.5 * dtau)?;
            step(&half, 1.0, 0.5 * dtau)?
        } else {
            step(&prev, 0.5, dtau)?
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(ArbError::Solver("nonfinite PDE solution".into()));
        }
        rows.push(next.clone());
        prev = next;
    }
    Ok(PdeSurface { s_nodes, taus, rows })
}
