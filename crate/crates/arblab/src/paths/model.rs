//! Model catalogue.

use serde::{Deserialize, Serialize};

use crate::error::{ArbError, Result};

/// The one-dimensional diffusion models the laboratory simulates and prices.
///
/// Levels are in dimensionless currency units, time in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Geometric Brownian motion reflected from below at `b`:
    /// `dS = sigma S dBeta + mu S dt + dL`, `S >= b`.
    ReflectedGbm { s0: f64, b: f64, mu: f64, sigma: f64 },
    /// Skew Brownian motion with skew parameter `alpha` at level 0:
    /// `dS = dBeta + (2 alpha - 1) dLtilde`. Takes values in all of R.
    SkewBm { s0: f64, alpha: f64 },
    /// Three-dimensional Bessel process, simulated as the norm of a
    /// three-dimensional Brownian motion (exact in law at grid points).
    Bessel3 { x0: f64 },
    /// Bessel process of index `nu`, absorbed at 0:
    /// `dS = dBeta + (nu + 1/2) dt / S`.
    BesselIndex { x0: f64, nu: f64 },
    /// Squared Bessel process of dimension `delta`:
    /// `dS = 2 sqrt(S) dBeta + delta dt`, absorbed at 0 when `delta < 2`.
    SquaredBessel { s0: f64, delta: f64 },
    /// `S = s0 + |beta_t| - |beta_0| + (alpha - 1) L^0_t(beta)`: a Brownian
    /// motion's reflected magnitude with an extra local-time push at the
    /// moving boundary `s0 - |beta_0| + (alpha - 1) L^0_t`.
    LocalTimeAlpha { s0: f64, beta0_abs: f64, alpha: f64 },
    /// Brownian motion folded into `[k1, k2]` (doubly reflected).
    DoublyReflectedBm { s0: f64, k1: f64, k2: f64 },
    /// `S = s0 + beta_t + sqrt(t)`.
    SqrtDrift { s0: f64 },
    /// `dS = sigma S dBeta - dt`, absorbed at 0.
    ConstDriftGbm { s0: f64, sigma: f64 },
    /// Brownian motion started at `x0` run to its first hit of `j`, then a
    /// three-dimensional Bessel process rebound from `j`.
    WilliamsBessel { x0: f64, j: f64 },
}

impl ModelSpec {
    /// Validate parameter ranges.
    ///
    /// `ReflectedGbm` accepts `sigma == 0` as the degenerate (deterministic)
    /// diffusion; the pricing formulas reject it separately where required.
    pub fn validate(&self) -> Result<()> {
        use ModelSpec::*;
        let err = |m: String| Err(ArbError::Parameter(m));
        match *self {
            ReflectedGbm { s0, b, mu, sigma } => {
                if !(s0.is_finite() && b.is_finite() && mu.is_finite() && sigma.is_finite()) {
                    return err("reflected GBM parameters must be finite".into());
                }
                if !(0.0 < b && b < s0) {
                    return err(format!("reflected GBM requires 0 < b < s0, got b={b}, s0={s0}"));
                }
            }
            SkewBm { s0, alpha } => {
                if s0 < 0.0 {
                    return err("skew BM start must be nonnegative".into());
                }
                if !(0.0 < alpha && alpha < 1.0) {
                    return err(format!("skew parameter must lie in (0,1), got {alpha}"));
                }
            }
            Bessel3 { x0 } => {
                if x0 < 0.0 {
                    return err("Bessel(3) start must be nonnegative".into());
                }
            }
            BesselIndex { x0, nu } => {
                if x0 < 0.0 || !nu.is_finite() {
                    return err("Bessel index model requires x0 >= 0 and finite nu".into());
                }
            }
            SquaredBessel { s0, delta } => {
                if s0 < 0.0 || delta < 0.0 {
                    return err("squared Bessel requires s0 >= 0 and delta >= 0".into());
                }
            }
            LocalTimeAlpha { s0, beta0_abs, alpha } => {
                if alpha < 1.0 {
                    return err(format!("local-time model requires alpha >= 1, got {alpha}"));
                }
                if !(0.0 <= beta0_abs && beta0_abs <= s0) {
                    return err("local-time model requires 0 <= |beta0| <= s0".into());
                }
            }
            DoublyReflectedBm { s0, k1, k2 } => {
                if !(0.0 <= k1 && k1 < k2) {
                    return err(format!("doubly reflected BM requires 0 <= k1 < k2, got {k1}, {k2}"));
                }
                if !(k1 <= s0 && s0 <= k2) {
                    return err("doubly reflected BM start must lie in [k1, k2]".into());
                }
            }
            SqrtDrift { s0 } => {
                if s0 < 0.0 {
                    return err("sqrt-drift start must be nonnegative".into());
                }
            }
            ConstDriftGbm { s0, sigma } => {
                if s0 <= 0.0 || sigma == 0.0 || !sigma.is_finite() {
                    return err("constant-drift GBM requires s0 > 0 and sigma != 0".into());
                }
            }
            WilliamsBessel { x0, j } => {
                if !(0.0 < j && j < x0) {
                    return err(format!("Williams model requires 0 < j < x0, got j={j}, x0={x0}"));
                }
            }
        }
        Ok(())
    }

    pub fn initial_value(&self) -> f64 {
        use ModelSpec::*;
        match *self {
            ReflectedGbm { s0, .. }
            | SkewBm { s0, .. }
            | SquaredBessel { s0, .. }
            | LocalTimeAlpha { s0, .. }
            | DoublyReflectedBm { s0, .. }
            | SqrtDrift { s0 }
            | ConstDriftGbm { s0, .. } => s0,
            Bessel3 { x0 } | BesselIndex { x0, .. } | WilliamsBessel { x0, .. } => x0,
        }
    }

    /// Diffusion coefficient of the price at level `s` (the `sigma(s)` whose
    /// square drives the quadratic variation).
    pub fn diffusion_coeff(&self, s: f64) -> f64 {
        use ModelSpec::*;
        match *self {
            ReflectedGbm { sigma, .. } => sigma * s.max(0.0),
            ConstDriftGbm { sigma, .. } => sigma * s.max(0.0),
            SquaredBessel { .. } => 2.0 * s.max(0.0).sqrt(),
            SkewBm { .. }
            | Bessel3 { .. }
            | BesselIndex { .. }
            | LocalTimeAlpha { .. }
            | DoublyReflectedBm { .. }
            | SqrtDrift { .. }
            | WilliamsBessel { .. } => 1.0,
        }
    }

    /// Whether the model is transient toward +infinity, so that a
    /// future-infimum enlargement is meaningful.
    pub fn is_transient_up(&self) -> bool {
        use ModelSpec::*;
        match *self {
            Bessel3 { x0 } => x0 >= 0.0,
            BesselIndex { nu, .. } => nu > 0.0,
            SquaredBessel { delta, .. } => delta > 2.0,
            LocalTimeAlpha { alpha, .. } => (alpha - 2.0).abs() < 1e-12,
            _ => false,
        }
    }

    /// Whether the model carries a nontrivial singular component.
    pub fn has_singular_part(&self) -> bool {
        use ModelSpec::*;
        matches!(
            *self,
            ReflectedGbm { .. } | LocalTimeAlpha { .. } | DoublyReflectedBm { .. }
        ) || matches!(*self, SkewBm { alpha, .. } if (alpha - 0.5).abs() > 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_parameters() {
        assert!(ModelSpec::ReflectedGbm { s0: 100.0, b: 120.0, mu: 0.0, sigma: 0.2 }
            .validate()
            .is_err());
        assert!(ModelSpec::SkewBm { s0: 0.0, alpha: 1.0 }.validate().is_err());
        assert!(ModelSpec::LocalTimeAlpha { s0: 1.0, beta0_abs: 2.0, alpha: 2.0 }
            .validate()
            .is_err());
        assert!(ModelSpec::DoublyReflectedBm { s0: 1.5, k1: 1.0, k2: 2.0 }
            .validate()
            .is_ok());
        assert!(ModelSpec::DoublyReflectedBm { s0: 0.5, k1: 1.0, k2: 2.0 }
            .validate()
            .is_err());
        assert!(ModelSpec::WilliamsBessel { x0: 2.0, j: 2.5 }.validate().is_err());
    }

    #[test]
    fn degenerate_reflected_gbm_is_accepted() {
        assert!(ModelSpec::ReflectedGbm { s0: 100.0, b: 80.0, mu: 0.0, sigma: 0.0 }
            .validate()
            .is_ok());
    }
}
