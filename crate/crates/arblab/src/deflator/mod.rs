//! Minimal-deflator machinery along simulated paths.
//!
//! The deflator is the stochastic exponential of minus the market price of
//! risk integrated against the martingale driver, killed when the cumulative
//! mean-variance tradeoff explodes or the path is absorbed. It is accumulated
//! in log space to avoid under/overflow.

mod pricing;

pub use pricing::{
    price_increasing_profit, price_ip_truncated, price_master, price_na1,
    price_strong_arbitrage, McPrice,
};

use crate::error::{ArbError, Result};
use crate::paths::{ModelSpec, SamplePath};

/// Threshold above which the cumulative mean-variance tradeoff is treated as
/// infinite.
pub const DEFAULT_KBAR_CAP: f64 = 1e8;

/// Analytic structure of a market model: the market-price-of-risk density,
/// the support of the singular component, and the rules that locate the
/// model's arbitrage times.
#[derive(Debug, Clone)]
pub struct MarketStructure {
    model: ModelSpec,
    pub kbar_cap: f64,
}

impl MarketStructure {
    pub fn for_model(model: &ModelSpec) -> Result<Self> {
        model.validate()?;
        Ok(MarketStructure { model: *model, kbar_cap: DEFAULT_KBAR_CAP })
    }

    pub fn with_cap(model: &ModelSpec, kbar_cap: f64) -> Result<Self> {
        if kbar_cap <= 0.0 {
            return Err(ArbError::Parameter("kbar_cap must be positive".into()));
        }
        model.validate()?;
        Ok(MarketStructure { model: *model, kbar_cap })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// Market price of risk at step `i` of `path` (the scalar lambda with
    /// drift = lambda * d<M,M>).
    pub fn lambda(&self, path: &SamplePath, i: usize) -> f64 {
        use ModelSpec::*;
        let s = path.values[i];
        match self.model {
            ReflectedGbm { mu, sigma, .. } => {
                if sigma == 0.0 || s <= 0.0 {
                    0.0
                } else {
                    mu / (sigma * sigma * s)
                }
            }
            SkewBm { .. } | LocalTimeAlpha { .. } | DoublyReflectedBm { .. } => 0.0,
            Bessel3 { .. } => {
                if s > 0.0 {
                    1.0 / s
                } else {
                    0.0
                }
            }
            BesselIndex { nu, .. } => {
                if s > 0.0 {
                    (nu + 0.5) / s
                } else {
                    0.0
                }
            }
            SquaredBessel { delta, .. } => {
                if s > 0.0 {
                    delta / (4.0 * s)
                } else {
                    0.0
                }
            }
            SqrtDrift { .. } => {
                let t = path.grid.time_at(i);
                if t > 0.0 {
                    1.0 / (2.0 * t.sqrt())
                } else {
                    f64::INFINITY
                }
            }
            ConstDriftGbm { sigma, .. } => {
                if s > 0.0 {
                    -1.0 / (sigma * sigma * s * s)
                } else {
                    0.0
                }
            }
            WilliamsBessel { j, .. } => match path.singular_marker {
                Some(m) if i >= m => {
                    let r = s - j;
                    if r > 0.0 {
                        1.0 / r
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            },
        }
    }

    /// Model-declared strong-arbitrage time, as a grid index.
    pub fn rho_plus_index(&self, path: &SamplePath) -> Option<usize> {
        use ModelSpec::*;
        match self.model {
            SqrtDrift { .. } => Some(0),
            Bessel3 { x0 } if x0 == 0.0 => Some(0),
            WilliamsBessel { .. } => path.singular_marker,
            _ => None,
        }
    }
}

/// Per-path deflator bookkeeping.
#[derive(Debug, Clone)]
pub struct DeflatorTrack {
    /// The killed deflator `Zhat_t`; 0 from `rho_one` on.
    pub z: Vec<f64>,
    /// Left limits `Lhat_t` (`Lhat_0 = 1`); may be positive where `z` has
    /// jumped to 0.
    pub l: Vec<f64>,
    /// Cumulative mean-variance tradeoff `Khat_t`; nondecreasing.
    pub k: Vec<f64>,
    /// First index with singular activity.
    pub rho_star: Option<usize>,
    /// Model-declared strong-arbitrage index.
    pub rho_plus: Option<usize>,
    /// First index where the deflator is killed (tradeoff explosion or
    /// absorption).
    pub rho_one: Option<usize>,
}

impl DeflatorTrack {
    /// First index where the left-limit deflator falls below `eps`.
    pub fn first_time_l_below(&self, eps: f64) -> Option<usize> {
        self.l.iter().position(|&v| v < eps)
    }
}

/// Compute the deflator track along `path`.
pub fn deflate(path: &SamplePath, ms: &MarketStructure) -> Result<DeflatorTrack> {
    let n = path.n_steps();
    if path.values.len() != n + 1 || path.driver_increments.len() != n {
        return Err(ArbError::Structural("path track lengths disagree".into()));
    }
    let dt = path.grid.dt();
    let mut z = Vec::with_capacity(n + 1);
    let mut l = Vec::with_capacity(n + 1);
    let mut k = Vec::with_capacity(n + 1);
    z.push(1.0);
    l.push(1.0);
    k.push(0.0);

    let mut log_z = 0.0f64;
    let mut rho_one: Option<usize> = None;
    let mut rho_star: Option<usize> = None;

    for i in 0..n {
        let lam = ms.lambda(path, i);
        let sig = ms.model.diffusion_coeff(path.values[i]);
        let dm = sig * path.driver_increments[i];
        let dk = lam * lam * sig * sig * dt;
        let k_next = k[i] + dk;
        if rho_one.is_none() {
            log_z -= lam * dm + 0.5 * dk;
        }
        k.push(if k_next.is_finite() { k_next } else { f64::MAX });

        if rho_star.is_none() && path.kappa_var[i + 1] > path.kappa_var[i] {
            rho_star = Some(i + 1);
        }
        let killed_now = rho_one.is_none()
            && (!k[i + 1].is_finite()
                || k[i + 1] >= ms.kbar_cap
                || path.absorbed_at.is_some_and(|a| a <= i + 1));
        if killed_now {
            rho_one = Some(i + 1);
        }
        let exp_part = log_z.exp();
        match rho_one {
            Some(r) if i + 1 > r => {
                z.push(0.0);
                l.push(0.0);
            }
            Some(r) if i + 1 == r => {
                z.push(0.0);
                l.push(exp_part);
            }
            _ => {
                z.push(exp_part);
                l.push(exp_part);
            }
        }
    }

    Ok(DeflatorTrack {
        z,
        l,
        k,
        rho_star,
        rho_plus: ms.rho_plus_index(path),
        rho_one,
    })
}

/// Evaluate both sides of the stopped reciprocal-deflator identity
/// `1 / Lhat^{theta_eps}_t = 1 + int (1/Lhat_u) lambda_u dS_u`
/// along the path and return the largest absolute residual.
pub fn lemma_l_identity_check(path: &SamplePath, ms: &MarketStructure, eps: f64) -> Result<f64> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(ArbError::Parameter("eps must lie in (0,1)".into()));
    }
    let track = deflate(path, ms)?;
    let stop = track.first_time_l_below(eps).unwrap_or(path.values.len());
    let mut integral = 0.0;
    let mut max_residual: f64 = 0.0;
    for i in 0..path.n_steps() {
        if i + 1 > stop {
            break;
        }
        let lam = ms.lambda(path, i);
        let ds = path.values[i + 1] - path.values[i];
        if track.l[i] > 0.0 {
            integral += lam / track.l[i] * ds;
        }
        if track.l[i + 1] > 0.0 {
            let lhs = 1.0 / track.l[i + 1];
            max_residual = max_residual.max((lhs - (1.0 + integral)).abs());
        }
    }
    Ok(max_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{simulate, RngSpec, TimeGrid};

    #[test]
    fn zero_lambda_gives_unit_deflator() {
        let model = ModelSpec::LocalTimeAlpha { s0: 1.0, beta0_abs: 0.5, alpha: 2.0 };
        let grid = TimeGrid::new(0.0, 1.0, 500).unwrap();
        let path = simulate(&model, &grid, &RngSpec::new(4, 2)).unwrap();
        let ms = MarketStructure::for_model(&model).unwrap();
        let track = deflate(&path, &ms).unwrap();
        assert!(track.z.iter().all(|&z| z == 1.0));
        assert!(track.k.iter().all(|&k| k == 0.0));
        assert!(track.rho_one.is_none());
        assert!(track.rho_plus.is_none());
        // kappa is active, so rho_star is detected
        assert!(track.rho_star.is_some() || *path.kappa_var.last().unwrap() == 0.0);
        let res = lemma_l_identity_check(&path, &ms, 0.01).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn bessel3_deflator_matches_ratio_identity() {
        // Zhat_t = x0 / X_t pathwise, to 1e-3 relative at dt = 1e-4.
        let x0 = 8.0;
        let model = ModelSpec::Bessel3 { x0 };
        let grid = TimeGrid::new(0.0, 1.0, 10_000).unwrap();
        let ms = MarketStructure::for_model(&model).unwrap();
        for k in 0..30 {
            let path = simulate(&model, &grid, &RngSpec::new(99, k)).unwrap();
            let track = deflate(&path, &ms).unwrap();
            for i in (0..=path.n_steps()).step_by(500) {
                let target = x0 / path.values[i];
                let rel = (track.z[i] - target).abs() / target;
                assert!(rel <= 1e-3, "path {k} index {i}: rel err {rel}");
            }
        }
    }

    #[test]
    fn reflected_gbm_rho_star_is_first_reflection() {
        let model = ModelSpec::ReflectedGbm { s0: 100.0, b: 96.0, mu: 0.05, sigma: 0.2 };
        let grid = TimeGrid::new(0.0, 1.0, 2_000).unwrap();
        let ms = MarketStructure::for_model(&model).unwrap();
        for k in 0..20 {
            let path = simulate(&model, &grid, &RngSpec::new(7, k)).unwrap();
            let track = deflate(&path, &ms).unwrap();
            let first = path
                .kappa_var
                .windows(2)
                .position(|w| w[1] > w[0])
                .map(|i| i + 1);
            assert_eq!(track.rho_star, first);
        }
    }

    #[test]
    fn sqrt_drift_tradeoff_explodes_at_zero() {
        let model = ModelSpec::SqrtDrift { s0: 1.0 };
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let path = simulate(&model, &grid, &RngSpec::new(1, 0)).unwrap();
        let ms = MarketStructure::for_model(&model).unwrap();
        let track = deflate(&path, &ms).unwrap();
        assert_eq!(track.rho_one, Some(1));
        assert_eq!(track.rho_plus, Some(0));
        assert_eq!(*track.z.last().unwrap(), 0.0);
    }

    #[test]
    fn lemma_identity_residual_small_on_bessel_paths() {
        let model = ModelSpec::Bessel3 { x0: 2.0 };
        let grid = TimeGrid::new(0.0, 1.0, 10_000).unwrap();
        let ms = MarketStructure::for_model(&model).unwrap();
        for k in 0..10 {
            let path = simulate(&model, &grid, &RngSpec::new(55, k)).unwrap();
            let res = lemma_l_identity_check(&path, &ms, 0.01).unwrap();
            assert!(res <= 1e-2, "path {k}: residual {res}");
        }
    }

    #[test]
    fn lemma_residual_shrinks_under_refinement_coupling() {
        // refine the same Brownian driver and check the residual drops
        let model = ModelSpec::Bessel3 { x0: 2.0 };
        let fine_grid = TimeGrid::new(0.0, 1.0, 8_000).unwrap();
        let ms = MarketStructure::for_model(&model).unwrap();
        let mut coarse_worse = 0;
        for k in 0..10 {
            let fine = simulate(&model, &fine_grid, &RngSpec::new(77, k)).unwrap();
            // coarsen by pairing steps
            let coarse_grid = TimeGrid::new(0.0, 1.0, 4_000).unwrap();
            let mut coarse = crate::paths::SamplePath::with_capacity(coarse_grid, fine.values[0]);
            for i in (2..=8_000).step_by(2) {
                coarse.values.push(fine.values[i]);
                coarse
                    .driver_increments
                    .push(fine.values[i] - fine.values[i - 2] - coarse_grid.dt() / fine.values[i - 2]);
                coarse.kappa.push(0.0);
                coarse.kappa_var.push(0.0);
            }
            let r_fine = lemma_l_identity_check(&fine, &ms, 0.01).unwrap();
            let r_coarse = lemma_l_identity_check(&coarse, &ms, 0.01).unwrap();
            if r_coarse > r_fine {
                coarse_worse += 1;
            }
        }
        assert!(coarse_worse >= 7, "refinement improved only {coarse_worse}/10 paths");
    }
}
