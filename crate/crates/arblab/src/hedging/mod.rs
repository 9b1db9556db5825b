//! Explicit trading strategies, wealth-process discretization, and pathwise
//! superreplication verification.

mod strategies;

pub use strategies::{
    barrier_delta_initial, barrier_delta_strategy, bessel_na_strategy,
    increasing_profit_strategy, localtime_corrected_strategy, localtime_initial,
    skew_corrected_strategy, skew_initial,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ArbError, Result};
use crate::paths::{simulate, ModelSpec, RngSpec, SamplePath, TimeGrid};
use crate::pricers::Payoff;

/// A self-financing position rule. The holdings callback receives the step
/// index `i` and the path, and must read only information available at or
/// before grid point `i` (values, singular tracks, and local times up to and
/// including index `i`).
pub struct Strategy {
    holdings: Box<dyn Fn(usize, &SamplePath) -> f64 + Send + Sync>,
    /// Lower bound the wealth process is allowed to reach (admissibility).
    pub admissibility_floor: f64,
    pub label: String,
}

impl Strategy {
    pub fn new<F>(label: impl Into<String>, admissibility_floor: f64, holdings: F) -> Self
    where
        F: Fn(usize, &SamplePath) -> f64 + Send + Sync + 'static,
    {
        Strategy { holdings: Box::new(holdings), admissibility_floor, label: label.into() }
    }

    /// Units of stock held over the step starting at grid point `i`.
    pub fn holdings(&self, i: usize, path: &SamplePath) -> f64 {
        (self.holdings)(i, path)
    }
}

impl std::fmt::Debug for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Strategy")
            .field("label", &self.label)
            .field("admissibility_floor", &self.admissibility_floor)
            .finish()
    }
}

/// Wealth of the self-financing strategy along a path:
/// `V_{i+1} = V_i + h_i (S_{i+1} - S_i)` with predictable (left-point)
/// holdings.
pub fn wealth_process(path: &SamplePath, strat: &Strategy, x0: f64) -> Vec<f64> {
    let n = path.n_steps();
    let mut v = Vec::with_capacity(n + 1);
    v.push(x0);
    let mut w = x0;
    for i in 0..n {
        let h = strat.holdings(i, path);
        w += h * (path.values[i + 1] - path.values[i]);
        v.push(w);
    }
    v
}

/// Aggregate pathwise superreplication outcome.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WealthReport {
    /// Initial fortune handed to the strategy.
    pub initial: f64,
    /// Smallest wealth seen over all paths and times.
    pub min_wealth: f64,
    /// Worst terminal shortfall `payoff - V_T` (positive = failure).
    pub terminal_shortfall: f64,
    /// Fraction of paths whose shortfall exceeds the tolerance.
    pub violation_fraction: f64,
    pub paths_checked: usize,
}

/// Simulate `n_paths` of `model`, run the strategy from `x0`, and aggregate
/// minimum wealth, terminal shortfalls against `g`, and the fraction of
/// paths whose shortfall exceeds `shortfall_tol`.
pub fn verify_superreplication(
    model: &ModelSpec,
    strat: &Strategy,
    x0: f64,
    g: &Payoff,
    n_paths: usize,
    grid: &TimeGrid,
    master_seed: u64,
    shortfall_tol: f64,
) -> Result<WealthReport> {
    if n_paths == 0 {
        return Err(ArbError::Parameter("n_paths must be positive".into()));
    }
    let per_path: Vec<(f64, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|idx| -> Result<(f64, f64)> {
            let path = simulate(model, grid, &RngSpec::new(master_seed, idx))?;
            let wealth = wealth_process(&path, strat, x0);
            let min_w = wealth.iter().cloned().fold(f64::INFINITY, f64::min);
            let shortfall = g.eval(path.terminal()) - *wealth.last().unwrap();
            Ok((min_w, shortfall))
        })
        .collect::<Result<_>>()?;
    let min_wealth = per_path.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let terminal_shortfall = per_path.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let violations = per_path.iter().filter(|p| p.1 > shortfall_tol).count();
    Ok(WealthReport {
        initial: x0,
        min_wealth,
        terminal_shortfall,
        violation_fraction: violations as f64 / n_paths as f64,
        paths_checked: n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_strategy(h: f64) -> Strategy {
        Strategy::new("flat", 0.0, move |_, _| h)
    }

    #[test]
    fn zero_holdings_keep_wealth_constant() {
        let model = ModelSpec::Bessel3 { x0: 1.0 };
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let path = simulate(&model, &grid, &RngSpec::new(1, 0)).unwrap();
        let v = wealth_process(&path, &flat_strategy(0.0), 5.0);
        assert!(v.iter().all(|&x| x == 5.0));
    }

    #[test]
    fn buy_and_hold_telescopes_exactly() {
        let model = ModelSpec::ReflectedGbm { s0: 100.0, b: 90.0, mu: 0.1, sigma: 0.3 };
        let grid = TimeGrid::new(0.0, 1.0, 512).unwrap();
        for k in 0..20 {
            let path = simulate(&model, &grid, &RngSpec::new(6, k)).unwrap();
            let v = wealth_process(&path, &flat_strategy(1.0), 7.0);
            let expect = 7.0 + path.terminal() - path.values[0];
            assert!((v.last().unwrap() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn shifting_initial_fortune_shifts_wealth_linearly() {
        let model = ModelSpec::SkewBm { s0: 1.0, alpha: 0.7 };
        let grid = TimeGrid::new(0.0, 1.0, 128).unwrap();
        let strat = skew_corrected_strategy(&Payoff::call(0.6, 1.0), 1.0, 0.7, 0.0).unwrap();
        let path = simulate(&model, &grid, &RngSpec::new(2, 3)).unwrap();
        let v0 = wealth_process(&path, &strat, 1.0);
        let v1 = wealth_process(&path, &strat, 2.0);
        for (a, b) in v0.iter().zip(v1.iter()) {
            assert!((b - a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn predictability_under_suffix_resampling() {
        // two paths sharing a prefix must produce identical holdings at the
        // junction step for every strategy
        let model = ModelSpec::LocalTimeAlpha { s0: 1.3, beta0_abs: 1.2, alpha: 2.0 };
        let grid = TimeGrid::new(0.0, 0.25, 250).unwrap();
        let a = simulate(&model, &grid, &RngSpec::new(9, 0)).unwrap();
        let mut b = a.clone();
        // resample the suffix from an independent path with the same prefix state
        let c = simulate(&model, &grid, &RngSpec::new(9, 1)).unwrap();
        let split = 125;
        for i in split + 1..b.values.len() {
            b.values[i] = c.values[i];
            b.kappa[i] = c.kappa[i];
            b.kappa_var[i] = c.kappa_var[i];
            b.local_times[0].cumulative[i] = c.local_times[0].cumulative[i];
        }
        let strat =
            localtime_corrected_strategy(&Payoff::call(0.7, 0.25), 0.25, 2.0, 0.0).unwrap();
        for i in 0..=split {
            let ha = strat.holdings(i, &a);
            let hb = strat.holdings(i, &b);
            assert_eq!(ha.to_bits(), hb.to_bits(), "holdings differ at step {i}");
        }
    }

    #[test]
    fn verify_reports_linear_shift() {
        let model = ModelSpec::Bessel3 { x0: 1.0 };
        let grid = TimeGrid::new(0.0, 1.0, 200).unwrap();
        let strat = flat_strategy(0.0);
        let g = Payoff::custom(vec![0.0, 100.0], vec![0.5, 0.5], 1.0).unwrap();
        let r0 = verify_superreplication(&model, &strat, 0.5, &g, 100, &grid, 4, 0.0).unwrap();
        let r1 = verify_superreplication(&model, &strat, 1.5, &g, 100, &grid, 4, 0.0).unwrap();
        assert!((r1.min_wealth - r0.min_wealth - 1.0).abs() < 1e-12);
        assert!((r0.terminal_shortfall - 0.0).abs() < 1e-12);
        assert_eq!(r1.violation_fraction, 0.0);
    }
}
