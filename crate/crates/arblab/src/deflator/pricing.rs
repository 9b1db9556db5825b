//! Monte Carlo pricing under increasing profit, strong arbitrage, and
//! arbitrage of the first kind.
//!
//! Estimators collect one value per path (independent counter-derived
//! streams) and reduce in path order, so a price is a pure function of
//! `(model, payoff, grid, n_paths, master_seed)`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::deflator::{deflate, MarketStructure};
use crate::error::{ArbError, Result};
use crate::math::stats::MeanVar;
use crate::paths::{simulate, ModelSpec, RngSpec, SamplePath, TimeGrid};
use crate::pricers::Payoff;

/// Monte Carlo price with its standard error.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct McPrice {
    pub price: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

fn mc_from(values: &[f64]) -> McPrice {
    let acc = MeanVar::from_slice(values);
    McPrice { price: acc.mean(), std_error: acc.std_error(), n_paths: values.len() }
}

fn run_batch<F>(n_paths: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if n_paths == 0 {
        return Err(ArbError::Parameter("n_paths must be positive".into()));
    }
    (0..n_paths as u64)
        .into_par_iter()
        .map(&f)
        .collect::<Result<Vec<f64>>>()
}

fn check_maturity(g: &Payoff, grid: &TimeGrid) -> Result<()> {
    g.validate()?;
    if (g.maturity - grid.t_end()).abs() > 1e-9 * (1.0 + g.maturity.abs()) {
        return Err(ArbError::Structural(format!(
            "payoff maturity {} differs from grid horizon {}",
            g.maturity,
            grid.t_end()
        )));
    }
    Ok(())
}

/// Probability weight that the singular component stayed inactive through
/// the horizon, with Brownian-bridge correction of between-grid boundary
/// hits where the model's driver supports it.
fn kappa_survival_weight(model: &ModelSpec, path: &SamplePath) -> f64 {
    let dt = path.grid.dt();
    match *model {
        ModelSpec::ReflectedGbm { b, sigma, .. } => {
            if sigma == 0.0 {
                return if *path.kappa_var.last().unwrap() > 0.0 { 0.0 } else { 1.0 };
            }
            let v = sigma * sigma * dt;
            let mut w = 1.0;
            let mut a_prev = (path.values[0] / b).ln();
            for i in 1..path.values.len() {
                let a = (path.values[i] / b).ln();
                if a_prev <= 0.0 || a <= 0.0 {
                    return 0.0;
                }
                let q = 2.0 * a_prev * a / v;
                if q < 40.0 {
                    w *= 1.0 - (-q).exp();
                    if w == 0.0 {
                        return 0.0;
                    }
                }
                a_prev = a;
            }
            w
        }
        ModelSpec::LocalTimeAlpha { s0, beta0_abs, .. } => {
            // the boundary is constant until first contact, which zeroes the
            // weight anyway
            let base = s0 - beta0_abs;
            distance_weight(path, |s| s - base, dt)
        }
        ModelSpec::SkewBm { alpha, .. } => {
            if (alpha - 0.5).abs() < 1e-12 {
                return 1.0;
            }
            distance_weight(path, |s| s.abs(), dt)
        }
        ModelSpec::DoublyReflectedBm { .. } => {
            if *path.kappa_var.last().unwrap() > 0.0 {
                0.0
            } else {
                1.0
            }
        }
        _ => 1.0,
    }
}

fn distance_weight<F: Fn(f64) -> f64>(path: &SamplePath, dist: F, dt: f64) -> f64 {
    let mut w = 1.0;
    let mut a_prev = dist(path.values[0]);
    for i in 1..path.values.len() {
        let a = dist(path.values[i]);
        if a_prev <= 0.0 || a <= 0.0 {
            return 0.0;
        }
        let q = 2.0 * a_prev * a / dt;
        if q < 40.0 {
            w *= 1.0 - (-q).exp();
            if w == 0.0 {
                return 0.0;
            }
        }
        a_prev = a;
    }
    w
}

fn ip_path_value(
    model: &ModelSpec,
    ms: &MarketStructure,
    g: &Payoff,
    grid: &TimeGrid,
    master_seed: u64,
    idx: u64,
) -> Result<f64> {
    let path = simulate(model, grid, &RngSpec::new(master_seed, idx))?;
    let track = deflate(&path, ms)?;
    if track.rho_one.is_some() {
        return Err(ArbError::RegimeViolation(
            "mean-variance tradeoff exceeded the cap on a path".into(),
        ));
    }
    let w = kappa_survival_weight(model, &path);
    if w == 0.0 {
        return Ok(0.0);
    }
    Ok(g.eval(path.terminal()) * track.l[path.n_steps()] * w)
}

/// Price of the claim in a market whose only arbitrage is the increasing
/// profit carried by the singular component: the deflated expectation of the
/// payoff on the event that the singular component stays inactive.
pub fn price_increasing_profit(
    model: &ModelSpec,
    g: &Payoff,
    n_paths: usize,
    grid: &TimeGrid,
    master_seed: u64,
) -> Result<McPrice> {
    check_maturity(g, grid)?;
    let ms = MarketStructure::for_model(model)?;
    let vals = run_batch(n_paths, |idx| ip_path_value(model, &ms, g, grid, master_seed, idx))?;
    Ok(mc_from(&vals))
}

/// Truncated-regularization price `E[g Zhat_T exp(-n |kappa|_T)]`; decreasing
/// in `n` toward the increasing-profit price.
pub fn price_ip_truncated(
    model: &ModelSpec,
    g: &Payoff,
    n_paths: usize,
    grid: &TimeGrid,
    master_seed: u64,
    trunc: f64,
) -> Result<McPrice> {
    check_maturity(g, grid)?;
    let ms = MarketStructure::for_model(model)?;
    let vals = run_batch(n_paths, |idx| {
        let path = simulate(model, grid, &RngSpec::new(master_seed, idx))?;
        let track = deflate(&path, &ms)?;
        let n = path.n_steps();
        Ok(g.eval(path.terminal()) * track.z[n] * (-trunc * path.kappa_var[n]).exp())
    })?;
    Ok(mc_from(&vals))
}

fn na1_path_value(
    model: &ModelSpec,
    ms: &MarketStructure,
    g: &Payoff,
    grid: &TimeGrid,
    master_seed: u64,
    idx: u64,
) -> Result<f64> {
    let path = simulate(model, grid, &RngSpec::new(master_seed, idx))?;
    let track = deflate(&path, ms)?;
    let n = path.n_steps();
    match track.rho_one {
        Some(r) if r < n => Ok(0.0),
        _ => Ok(g.eval(path.terminal()) * track.l[n]),
    }
}

/// Price of the claim in a market admitting arbitrage of the first kind:
/// the deflated expectation killed at the explosion of the mean-variance
/// tradeoff, detected by absorption for the in-scope models.
pub fn price_na1(
    model: &ModelSpec,
    g: &Payoff,
    n_paths: usize,
    grid: &TimeGrid,
    master_seed: u64,
) -> Result<McPrice> {
    check_maturity(g, grid)?;
    let ms = MarketStructure::for_model(model)?;
    let vals = run_batch(n_paths, |idx| na1_path_value(model, &ms, g, grid, master_seed, idx))?;
    Ok(mc_from(&vals))
}

/// Geometric refinement times from `eps` to `horizon`: the restarted
/// mean-variance tradeoff accrues a constant amount per step, which keeps
/// the restarted deflator's discretization error uniform in `eps`.
fn geometric_times(eps: f64, horizon: f64, n: usize) -> Vec<f64> {
    let r = (horizon / eps).powf(1.0 / n as f64);
    let mut ts = Vec::with_capacity(n + 1);
    let mut t = eps;
    ts.push(t);
    for _ in 0..n {
        t *= r;
        ts.push(t.min(horizon));
    }
    *ts.last_mut().unwrap() = horizon;
    ts
}

/// Strong-arbitrage price ladder: for each `eps`, the Monte Carlo estimate of
/// the payoff deflated by the deflator restarted at `eps`. The caller reads
/// convergence off the returned sequence as `eps` decreases.
pub fn price_strong_arbitrage(
    model: &ModelSpec,
    g: &Payoff,
    eps_seq: &[f64],
    n_paths: usize,
    master_seed: u64,
) -> Result<Vec<(f64, McPrice)>> {
    g.validate()?;
    let horizon = g.maturity;
    if eps_seq.is_empty() {
        return Err(ArbError::Parameter("need at least one epsilon".into()));
    }
    for w in eps_seq.windows(2) {
        if w[1] >= w[0] {
            return Err(ArbError::Parameter("epsilons must decrease".into()));
        }
    }
    if eps_seq[0] >= horizon || *eps_seq.last().unwrap() <= 0.0 {
        return Err(ArbError::Parameter("epsilons must lie in (0, maturity)".into()));
    }
    match *model {
        ModelSpec::Bessel3 { x0 } if x0 == 0.0 => {}
        ModelSpec::SqrtDrift { .. } => {}
        _ => {
            return Err(ArbError::UnsupportedModel(
                "strong-arbitrage pricing supports the Bessel(3)-from-zero and sqrt-drift models"
                    .into(),
            ))
        }
    }
    let mut out = Vec::with_capacity(eps_seq.len());
    for (eps_idx, &eps) in eps_seq.iter().enumerate() {
        let seed = master_seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(eps_idx as u64 + 1));
        let vals = run_batch(n_paths, |idx| sa_path_value(model, g, eps, horizon, seed, idx))?;
        out.push((eps, mc_from(&vals)));
    }
    Ok(out)
}

fn sa_path_value(
    model: &ModelSpec,
    g: &Payoff,
    eps: f64,
    horizon: f64,
    seed: u64,
    idx: u64,
) -> Result<f64> {
    let mut rng = RngSpec::new(seed, idx).stream();
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    match *model {
        ModelSpec::Bessel3 { .. } => {
            // The restarted stochastic exponential integrates in closed form
            // along Bessel(3) paths (its log-derivative telescopes), giving
            // Lhat_{eps,T} = X_eps / X_T pathwise; per-step increment sums
            // are stiff near the restart and are not used here.
            let se = eps.sqrt();
            let mut w = (se * normal(), se * normal(), se * normal());
            let x_eps = (w.0 * w.0 + w.1 * w.1 + w.2 * w.2).sqrt();
            let sd = (horizon - eps).sqrt();
            w.0 += sd * normal();
            w.1 += sd * normal();
            w.2 += sd * normal();
            let x_t = (w.0 * w.0 + w.1 * w.1 + w.2 * w.2).sqrt();
            if x_t <= 0.0 {
                return Err(ArbError::RegimeViolation("path reached zero".into()));
            }
            Ok(g.eval(x_t) * x_eps / x_t)
        }
        ModelSpec::SqrtDrift { s0 } => {
            let ts = geometric_times(eps, horizon, 400);
            let mut wt = eps.sqrt() * normal();
            let mut log_l = 0.0;
            for k in 1..ts.len() {
                let dt = ts[k] - ts[k - 1];
                let lam = 1.0 / (2.0 * ts[k - 1].sqrt());
                let dw = dt.sqrt() * normal();
                wt += dw;
                log_l -= lam * dw + 0.5 * lam * lam * dt;
            }
            if !log_l.is_finite() {
                return Err(ArbError::RegimeViolation(
                    "restarted deflator diverged on a path".into(),
                ));
            }
            let s_t = s0 + wt + horizon.sqrt();
            Ok(g.eval(s_t) * log_l.exp())
        }
        _ => unreachable!("guarded by caller"),
    }
}

/// Master pricing formula `E[xi Lhat 1{T <= rho}] + continuation at the
/// strong-arbitrage time`, with `rho` the earliest of the singular-activity,
/// strong-arbitrage, and tradeoff-explosion times. The continuation value is
/// table-driven per model: the models whose post-arbitrage law is in scope
/// restart as a Bessel(3) from zero, whose price of any bounded claim is 0.
pub fn price_master(
    model: &ModelSpec,
    g: &Payoff,
    n_paths: usize,
    grid: &TimeGrid,
    master_seed: u64,
) -> Result<McPrice> {
    match *model {
        ModelSpec::ReflectedGbm { .. }
        | ModelSpec::LocalTimeAlpha { .. }
        | ModelSpec::SkewBm { .. }
        | ModelSpec::DoublyReflectedBm { .. } => {
            price_increasing_profit(model, g, n_paths, grid, master_seed)
        }
        ModelSpec::Bessel3 { x0 } if x0 > 0.0 => price_na1(model, g, n_paths, grid, master_seed),
        ModelSpec::BesselIndex { .. }
        | ModelSpec::SquaredBessel { .. }
        | ModelSpec::ConstDriftGbm { .. } => price_na1(model, g, n_paths, grid, master_seed),
        ModelSpec::Bessel3 { .. } | ModelSpec::SqrtDrift { .. } => {
            // strong arbitrage at time 0: the whole price is the restart limit
            let ladder = price_strong_arbitrage(model, g, &[1e-3, 1e-4], n_paths, master_seed)?;
            Ok(ladder.last().unwrap().1)
        }
        ModelSpec::WilliamsBessel { x0, j } => {
            check_maturity(g, grid)?;
            let model = ModelSpec::WilliamsBessel { x0, j };
            let vals = run_batch(n_paths, |idx| {
                let path = simulate(&model, grid, &RngSpec::new(master_seed, idx))?;
                // before the passage time the price of risk vanishes, so the
                // deflator is 1 on surviving paths; the continuation value at
                // the passage time is the Bessel(3)-from-zero restart price 0
                Ok(if path.singular_marker.is_none() { g.eval(path.terminal()) } else { 0.0 })
            })?;
            Ok(mc_from(&vals))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricers::closed::{bs_barrier_call, bs_call};
    use crate::pricers::{bachelier_knockout, BarrierSpec};

    #[test]
    fn zero_payoff_prices_to_zero() {
        let model = ModelSpec::ReflectedGbm { s0: 100.0, b: 80.0, mu: 0.05, sigma: 0.2 };
        let grid = TimeGrid::new(0.0, 1.0, 50).unwrap();
        let g = Payoff::custom(vec![0.0, 1000.0], vec![0.0, 0.0], 1.0).unwrap();
        let p = price_increasing_profit(&model, &g, 200, &grid, 3).unwrap();
        assert_eq!(p.price, 0.0);
        assert_eq!(p.std_error, 0.0);
    }

    #[test]
    fn reflected_gbm_call_matches_barrier_closed_form() {
        let model = ModelSpec::ReflectedGbm { s0: 100.0, b: 80.0, mu: 0.05, sigma: 0.2 };
        let grid = TimeGrid::new(0.0, 1.0, 500).unwrap();
        let g = Payoff::call(100.0, 1.0);
        let p = price_increasing_profit(&model, &g, 20_000, &grid, 2024).unwrap();
        let target = bs_barrier_call(1.0, 100.0, 80.0, 100.0, 0.2).unwrap();
        let z = (p.price - target).abs() / p.std_error;
        assert!(z <= 3.0, "price {} vs {target} (z = {z})", p.price);
    }

    #[test]
    fn local_time_alpha_digital_matches_bachelier_survival() {
        let model = ModelSpec::LocalTimeAlpha { s0: 1.0, beta0_abs: 0.6, alpha: 1.0 };
        let grid = TimeGrid::new(0.0, 1.0, 500).unwrap();
        let g = Payoff::digital(1.0);
        let p = price_increasing_profit(&model, &g, 20_000, &grid, 11).unwrap();
        let target =
            bachelier_knockout(&g, 1.0, 1.0, &BarrierSpec::lower(0.4)).unwrap();
        let z = (p.price - target).abs() / p.std_error;
        assert!(z <= 3.0, "price {} vs {target} (z = {z})", p.price);
    }

    #[test]
    fn master_equals_ip_estimator_bitwise_on_reflected_gbm() {
        let model = ModelSpec::ReflectedGbm { s0: 100.0, b: 85.0, mu: 0.03, sigma: 0.25 };
        let grid = TimeGrid::new(0.0, 1.0, 200).unwrap();
        let g = Payoff::call(95.0, 1.0);
        let a = price_increasing_profit(&model, &g, 2_000, &grid, 77).unwrap();
        let b = price_master(&model, &g, 2_000, &grid, 77).unwrap();
        assert_eq!(a.price.to_bits(), b.price.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn master_equals_na1_estimator_bitwise_on_absorbing_model() {
        let model = ModelSpec::BesselIndex { x0: 1.0, nu: -0.5 };
        let grid = TimeGrid::new(0.0, 1.0, 200).unwrap();
        let g = Payoff::digital(1.0);
        let a = price_na1(&model, &g, 2_000, &grid, 78).unwrap();
        let b = price_master(&model, &g, 2_000, &grid, 78).unwrap();
        assert_eq!(a.price.to_bits(), b.price.to_bits());
    }

    #[test]
    fn na1_bessel_constant_payoff_prices_to_survival() {
        // payoff c in (0,1) prices to c * (2 Phi(x0/sqrt(T)) - 1)
        let model = ModelSpec::Bessel3 { x0: 1.0 };
        let grid = TimeGrid::new(0.0, 1.0, 400).unwrap();
        let c = 0.6;
        let g = Payoff::custom(vec![0.0, 1000.0], vec![c, c], 1.0).unwrap();
        let p = price_na1(&model, &g, 30_000, &grid, 5).unwrap();
        let target = c * crate::pricers::bessel_survival(1.0, 1.0);
        let z = (p.price - target).abs() / p.std_error;
        assert!(z <= 3.0, "price {} vs {target} (z = {z})", p.price);
    }

    #[test]
    fn na1_const_drift_gbm_call_matches_black_scholes() {
        let model = ModelSpec::ConstDriftGbm { s0: 1.0, sigma: 1.0 };
        let grid = TimeGrid::new(0.0, 1.0, 4_000).unwrap();
        let g = Payoff::call(1.0, 1.0);
        let p = price_na1(&model, &g, 200_000, &grid, 12).unwrap();
        let target = bs_call(1.0, 1.0, 1.0, 1.0);
        let z = (p.price - target).abs() / p.std_error.max(1e-9);
        assert!(z <= 3.0, "price {} +- {} vs {target} (z = {z})", p.price, p.std_error);
    }

    #[test]
    fn sa_sqrt_drift_digital_is_one() {
        let model = ModelSpec::SqrtDrift { s0: 1.0 };
        let g = Payoff::digital(1.0);
        let ladder =
            price_strong_arbitrage(&model, &g, &[1e-2, 1e-3], 50_000, 9).unwrap();
        for (eps, p) in ladder {
            assert!((p.price - 1.0).abs() < 0.01, "eps {eps}: {} +- {}", p.price, p.std_error);
        }
    }

    #[test]
    fn sa_bessel_from_zero_decreases_toward_zero() {
        let model = ModelSpec::Bessel3 { x0: 0.0 };
        let g = Payoff::digital(2.0);
        let ladder =
            price_strong_arbitrage(&model, &g, &[1e-2, 1e-3, 1e-4], 20_000, 10).unwrap();
        assert!(ladder[0].1.price > ladder[1].1.price);
        assert!(ladder[1].1.price > ladder[2].1.price);
        assert!(ladder[2].1.price <= 1e-2, "final estimate {}", ladder[2].1.price);
    }

    #[test]
    fn sa_rejects_unsupported_models() {
        let model = ModelSpec::Bessel3 { x0: 1.0 };
        let g = Payoff::digital(1.0);
        assert!(price_strong_arbitrage(&model, &g, &[1e-2], 10, 0).is_err());
    }

    #[test]
    fn williams_master_matches_bachelier_knockout() {
        let model = ModelSpec::WilliamsBessel { x0: 2.0, j: 1.0 };
        let grid = TimeGrid::new(0.0, 1.0, 1_000).unwrap();
        let g = Payoff::digital(1.0);
        let p = price_master(&model, &g, 30_000, &grid, 21).unwrap();
        let target = bachelier_knockout(&g, 1.0, 2.0, &BarrierSpec::lower(1.0)).unwrap();
        let z = (p.price - target).abs() / p.std_error;
        assert!(z <= 3.0, "price {} vs {target} (z = {z})", p.price);
    }

    #[test]
    fn truncated_prices_decrease_toward_ip_price() {
        let model = ModelSpec::ReflectedGbm { s0: 100.0, b: 90.0, mu: 0.05, sigma: 0.2 };
        let grid = TimeGrid::new(0.0, 1.0, 1_000).unwrap();
        let g = Payoff::call(95.0, 1.0);
        let seed = 31;
        let n = 10_000;
        let p1 = price_ip_truncated(&model, &g, n, &grid, seed, 0.5).unwrap();
        let p2 = price_ip_truncated(&model, &g, n, &grid, seed, 2.0).unwrap();
        let p3 = price_ip_truncated(&model, &g, n, &grid, seed, 20.0).unwrap();
        let ip = price_increasing_profit(&model, &g, n, &grid, seed).unwrap();
        assert!(p1.price >= p2.price && p2.price >= p3.price);
        let gap = (p3.price - ip.price).abs();
        assert!(
            gap <= 3.0 * (p3.std_error + ip.std_error),
            "truncated {} vs ip {} (gap {gap})",
            p3.price,
            ip.price
        );
    }
}
