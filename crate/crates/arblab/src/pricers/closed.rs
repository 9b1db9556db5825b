//! Closed-form prices and deltas used in Monte Carlo oracles and in the
//! hedging inner loops, where per-step quadrature would dominate the run
//! time. Every routine here is cross-checked against the quadrature route in
//! the test suite.

use crate::error::{ArbError, Result};
use crate::math::gauss::{bachelier_call_core, norm_cdf, norm_pdf, pdf_var};

/// Bachelier knock-out call `Psi^call(tau, x, j)` with strike `k`, lower
/// barrier `j <= x`.
pub fn psi_call(tau: f64, x: f64, j: f64, k: f64) -> f64 {
    if tau <= 0.0 {
        return if x > j { (x - k).max(0.0) } else { 0.0 };
    }
    if k >= j {
        bachelier_call_core(x - k, tau) - bachelier_call_core(2.0 * j - x - k, tau)
    } else {
        bachelier_call_core(x - j, tau) - bachelier_call_core(j - x, tau)
            + (j - k) * psi_digital(tau, x, j)
    }
}

/// Spatial derivative of `psi_call` for `x > j`; at `x == j` this returns the
/// right (domain-side) limit.
pub fn psi_call_x(tau: f64, x: f64, j: f64, k: f64) -> f64 {
    if tau <= 0.0 {
        return if x > k { 1.0 } else { 0.0 };
    }
    let s = tau.sqrt();
    if k >= j {
        norm_cdf((x - k) / s) + norm_cdf((2.0 * j - x - k) / s)
    } else {
        1.0 + 2.0 * (j - k) * pdf_var(x - j, tau)
    }
}

/// Barrier sensitivity of `psi_call` evaluated on the barrier,
/// `Psi_j(tau, j, j)`; equals minus the domain-side boundary delta.
pub fn psi_call_j_at_barrier(tau: f64, j: f64, k: f64) -> f64 {
    -psi_call_x(tau, j, j, k)
}

/// Bachelier knock-out survival factor `Psi^digital = 2 Phi((x-j)/sqrt(tau)) - 1`.
pub fn psi_digital(tau: f64, x: f64, j: f64) -> f64 {
    if tau <= 0.0 {
        return if x > j { 1.0 } else { 0.0 };
    }
    2.0 * norm_cdf((x - j) / tau.sqrt()) - 1.0
}

/// Spatial derivative of `psi_digital`.
pub fn psi_digital_x(tau: f64, x: f64, j: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    2.0 * pdf_var(x - j, tau)
}

/// Barrier sensitivity of `psi_digital` on the barrier.
pub fn psi_digital_j_at_barrier(tau: f64) -> f64 {
    -2.0 * pdf_var(0.0, tau)
}

/// Driftless zero-rate Black–Scholes call.
pub fn bs_call(s: f64, k: f64, sigma: f64, tau: f64) -> f64 {
    if tau <= 0.0 || sigma == 0.0 {
        return (s - k).max(0.0);
    }
    if s <= 0.0 {
        return 0.0;
    }
    if k <= 0.0 {
        return s - k;
    }
    let sv = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + 0.5 * sv * sv) / sv;
    let d2 = d1 - sv;
    s * norm_cdf(d1) - k * norm_cdf(d2)
}

/// Delta of `bs_call`.
pub fn bs_call_delta(s: f64, k: f64, sigma: f64, tau: f64) -> f64 {
    if tau <= 0.0 || sigma == 0.0 {
        return if s > k { 1.0 } else { 0.0 };
    }
    if k <= 0.0 {
        return 1.0;
    }
    let sv = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + 0.5 * sv * sv) / sv;
    norm_cdf(d1)
}

/// `P[S_tau > level]` for the driftless GBM.
fn bs_digital_above(s: f64, level: f64, sigma: f64, tau: f64) -> f64 {
    if tau <= 0.0 || sigma == 0.0 {
        return if s > level { 1.0 } else { 0.0 };
    }
    if level <= 0.0 {
        return 1.0;
    }
    let sv = sigma * tau.sqrt();
    let d2 = ((s / level).ln() - 0.5 * sv * sv) / sv;
    norm_cdf(d2)
}

fn bs_digital_above_delta(s: f64, level: f64, sigma: f64, tau: f64) -> f64 {
    if tau <= 0.0 || sigma == 0.0 || level <= 0.0 {
        return 0.0;
    }
    let sv = sigma * tau.sqrt();
    let d2 = ((s / level).ln() - 0.5 * sv * sv) / sv;
    norm_pdf(d2) / (s * sv)
}

/// Truncated vanilla `E[(S_tau - k)_+ 1{S_tau > b}]` for the driftless GBM.
fn truncated_call(s: f64, k: f64, b: f64, sigma: f64, tau: f64) -> f64 {
    bs_call(s, k.max(b), sigma, tau) + (b - k).max(0.0) * bs_digital_above(s, b, sigma, tau)
}

fn truncated_call_delta(s: f64, k: f64, b: f64, sigma: f64, tau: f64) -> f64 {
    bs_call_delta(s, k.max(b), sigma, tau)
        + (b - k).max(0.0) * bs_digital_above_delta(s, b, sigma, tau)
}

/// Down-and-out call on the driftless GBM (zero rate) by the image method:
/// `C(tau, s, b) = F(s) - (s/b) F(b^2/s)` with `F` the vanilla price of the
/// payoff truncated below the barrier. `b = 0` gives the plain
/// Black–Scholes call; `s = b` gives 0.
pub fn bs_barrier_call(tau: f64, s: f64, b: f64, strike: f64, sigma: f64) -> Result<f64> {
    if s < b {
        return Err(ArbError::Domain(format!("need s >= b, got s={s}, b={b}")));
    }
    if b < 0.0 || strike < 0.0 {
        return Err(ArbError::Parameter("barrier and strike must be nonnegative".into()));
    }
    if sigma == 0.0 {
        return Err(ArbError::Parameter("sigma must be nonzero".into()));
    }
    if tau < 0.0 {
        return Err(ArbError::Parameter("tau must be nonnegative".into()));
    }
    if tau == 0.0 {
        return Ok(if s > b || b == 0.0 { (s - strike).max(0.0) } else { 0.0 });
    }
    if b == 0.0 {
        return Ok(bs_call(s, strike, sigma, tau));
    }
    if s == b {
        return Ok(0.0);
    }
    let direct = truncated_call(s, strike, b, sigma, tau);
    let image = (s / b) * truncated_call(b * b / s, strike, b, sigma, tau);
    Ok(direct - image)
}

/// Delta of `bs_barrier_call`; finite on the barrier.
pub fn bs_barrier_delta(tau: f64, s: f64, b: f64, strike: f64, sigma: f64) -> Result<f64> {
    if s < b {
        return Err(ArbError::Domain(format!("need s >= b, got s={s}, b={b}")));
    }
    if tau <= 0.0 {
        return Ok(if s > strike { 1.0 } else { 0.0 });
    }
    if b == 0.0 {
        return Ok(bs_call_delta(s, strike, sigma, tau));
    }
    let w = b * b / s;
    let direct = truncated_call_delta(s, strike, b, sigma, tau);
    let image_level = truncated_call(w, strike, b, sigma, tau) / b;
    let image_slope = (b / s) * truncated_call_delta(w, strike, b, sigma, tau);
    Ok(direct - image_level + image_slope)
}
