//! The explicit strategies: barrier delta hedging, local-time-corrected
//! replication at a moving boundary, the skew correction at zero, the
//! Bessel(3) arbitrage, and singular-set harvesting.
//!
//! Boundary conventions. On the contact set of a one-sided reflected model
//! the holdings use the domain-side limit of the spatial derivative; the
//! symmetric-average convention applies only to the two-sided skew model,
//! where it combines with the derivative jump so that the expected wealth
//! increment matches the price increment on the contact set.

use crate::error::{ArbError, Result};
use crate::hedging::Strategy;
use crate::paths::{ModelSpec, SamplePath};
use crate::pricers::closed::{
    bs_barrier_call, bs_barrier_delta, psi_call_j_at_barrier, psi_call_x, psi_digital_j_at_barrier,
    psi_digital_x,
};
use crate::pricers::{bessel_survival, Payoff, PayoffKind};

const TAU_FLOOR: f64 = 1e-12;

/// Payoff-specific Bachelier knock-out derivative evaluators used by the
/// correction strategies.
#[derive(Debug, Clone)]
enum PsiDerivs {
    Call { strike: f64 },
    Digital,
}

impl PsiDerivs {
    fn from_payoff(g: &Payoff) -> Result<Self> {
        match &g.kind {
            PayoffKind::Call { strike } => Ok(PsiDerivs::Call { strike: *strike }),
            PayoffKind::Digital => Ok(PsiDerivs::Digital),
            other => Err(ArbError::UnsupportedModel(format!(
                "correction strategies support call and digital payoffs, got {other:?}"
            ))),
        }
    }

    /// Domain-side spatial derivative at `(tau, x)` above the barrier `j`.
    fn x_deriv(&self, tau: f64, x: f64, j: f64) -> f64 {
        match *self {
            PsiDerivs::Call { strike } => psi_call_x(tau, x, j, strike),
            PsiDerivs::Digital => psi_digital_x(tau, x, j),
        }
    }

    /// Barrier sensitivity on the barrier, `Psi_j(tau, j, j)`.
    fn j_deriv_at_barrier(&self, tau: f64, j: f64) -> f64 {
        match *self {
            PsiDerivs::Call { strike } => psi_call_j_at_barrier(tau, j, strike),
            PsiDerivs::Digital => psi_digital_j_at_barrier(tau),
        }
    }
}

/// Delta hedge of the down-and-out call on the reflected GBM: holdings are
/// the barrier-call delta evaluated at the running spot and remaining time.
/// From the barrier-call premium this replicates `(S_T - K)_+`.
pub fn barrier_delta_strategy(b: f64, strike: f64, t_maturity: f64, sigma: f64) -> Result<Strategy> {
    if sigma == 0.0 || b < 0.0 || strike < 0.0 || t_maturity <= 0.0 {
        return Err(ArbError::Parameter("invalid barrier delta parameters".into()));
    }
    Ok(Strategy::new("barrier_delta", 0.0, move |i, path: &SamplePath| {
        let tau = (t_maturity - path.grid.time_at(i)).max(TAU_FLOOR);
        let s = path.values[i].max(b);
        bs_barrier_delta(tau, s, b, strike, sigma).unwrap_or(0.0)
    }))
}

/// The paper fortune for `barrier_delta_strategy`.
pub fn barrier_delta_initial(b: f64, strike: f64, t_maturity: f64, sigma: f64, s0: f64) -> Result<f64> {
    bs_barrier_call(t_maturity, s0, b, strike, sigma)
}

/// Replication strategy for the local-time model: knock-out delta at the
/// moving boundary plus the boundary-sensitivity correction, active on the
/// contact set `{S - j <= bandwidth}`. With `alpha = 1` the correction
/// vanishes and this is the reflected-BM knock-out delta.
pub fn localtime_corrected_strategy(
    g: &Payoff,
    t_maturity: f64,
    alpha: f64,
    bandwidth: f64,
) -> Result<Strategy> {
    if alpha < 1.0 {
        return Err(ArbError::Parameter("local-time strategy needs alpha >= 1".into()));
    }
    let derivs = PsiDerivs::from_payoff(g)?;
    let corr = (alpha - 1.0) / alpha;
    Ok(Strategy::new("localtime_corrected", 0.0, move |i, path: &SamplePath| {
        let tau = (t_maturity - path.grid.time_at(i)).max(TAU_FLOOR);
        let base = path.local_times[0].level;
        let j = base + (alpha - 1.0) / alpha * path.kappa[i];
        let s = path.values[i].max(j);
        let mut h = derivs.x_deriv(tau, s, j);
        if corr > 0.0 && s - j <= bandwidth {
            h += corr * derivs.j_deriv_at_barrier(tau, j);
        }
        h
    }))
}

/// The paper fortune for the local-time strategy: the knock-out price at the
/// initial boundary.
pub fn localtime_initial(g: &Payoff, t_maturity: f64, s0: f64, j0: f64) -> Result<f64> {
    let derivs = PsiDerivs::from_payoff(g)?;
    Ok(match derivs {
        PsiDerivs::Call { strike } => crate::pricers::closed::psi_call(t_maturity, s0, j0, strike),
        PsiDerivs::Digital => crate::pricers::closed::psi_digital(t_maturity, s0, j0),
    })
}

/// Replication strategy for the skew model: knock-out delta away from zero
/// plus the symmetric-convention jump correction on the contact set.
pub fn skew_corrected_strategy(
    g: &Payoff,
    t_maturity: f64,
    alpha: f64,
    bandwidth: f64,
) -> Result<Strategy> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(ArbError::Parameter("skew strategy needs alpha in (0,1)".into()));
    }
    if (alpha - 0.5).abs() < 1e-12 {
        return Err(ArbError::Parameter(
            "alpha = 1/2 is a plain Brownian motion; no correction is defined".into(),
        ));
    }
    let derivs = PsiDerivs::from_payoff(g)?;
    if matches!(derivs, PsiDerivs::Digital) {
        return Err(ArbError::UnsupportedModel(
            "skew correction is implemented for call payoffs".into(),
        ));
    }
    let strike = match derivs {
        PsiDerivs::Call { strike } => strike,
        PsiDerivs::Digital => unreachable!(),
    };
    if strike <= 0.0 {
        return Err(ArbError::Parameter("skew call strike must be positive".into()));
    }
    let corr = 0.5 / (2.0 * alpha - 1.0);
    Ok(Strategy::new("skew_corrected", 0.0, move |i, path: &SamplePath| {
        let tau = (t_maturity - path.grid.time_at(i)).max(TAU_FLOOR);
        let s = path.values[i];
        if s.abs() <= bandwidth {
            // value = average of one-sided limits; the payoff lives on the
            // positive side so the left limit is 0
            let right = psi_call_x(tau, 0.0, 0.0, strike);
            return 0.5 * right + corr * right;
        }
        if s > 0.0 {
            psi_call_x(tau, s, 0.0, strike)
        } else {
            0.0
        }
    }))
}

/// The paper fortune for the skew strategy: the knock-out price at barrier 0.
pub fn skew_initial(g: &Payoff, t_maturity: f64, s0: f64) -> Result<f64> {
    match &g.kind {
        PayoffKind::Call { strike } => {
            Ok(crate::pricers::closed::psi_call(t_maturity, s0, 0.0, *strike))
        }
        other => Err(ArbError::UnsupportedModel(format!(
            "skew initial fortune implemented for calls, got {other:?}"
        ))),
    }
}

/// Zero-initial-fortune arbitrage on the Bessel(3) model: holdings are the
/// spatial derivative of the survival probability, wealth tracks
/// `Psi(T - t, X_t) - Psi(T, x0)` with floor `-Psi(T, x0)` and terminal value
/// `1 - Psi(T, x0) > 0`.
pub fn bessel_na_strategy(t_maturity: f64, x0: f64) -> Result<Strategy> {
    if x0 <= 0.0 || t_maturity <= 0.0 {
        return Err(ArbError::Parameter("need x0 > 0 and maturity > 0".into()));
    }
    let floor = bessel_survival(t_maturity, x0);
    Ok(Strategy::new("bessel_na", floor, move |i, path: &SamplePath| {
        let tau = (t_maturity - path.grid.time_at(i)).max(TAU_FLOOR);
        // d/dx [2 Phi(x / sqrt(tau)) - 1]
        2.0 * crate::math::gauss::pdf_var(path.values[i], tau)
    }))
}

/// Hold one unit of stock exactly on the singular set, signed by the
/// direction of the singular push. The simulators place the path exactly on
/// its boundary whenever the regulator binds at a grid point, so the contact
/// test is exact and the harvested gains are nondecreasing pathwise for
/// one-sided reflected models.
pub fn increasing_profit_strategy(model: &ModelSpec) -> Result<Strategy> {
    model.validate()?;
    match *model {
        ModelSpec::ReflectedGbm { b, .. } => {
            let tol = b * 1e-12;
            Ok(Strategy::new("increasing_profit", 0.0, move |i, path: &SamplePath| {
                if path.values[i] <= b + tol {
                    1.0
                } else {
                    0.0
                }
            }))
        }
        ModelSpec::LocalTimeAlpha { alpha, .. } => {
            Ok(Strategy::new("increasing_profit", 0.0, move |i, path: &SamplePath| {
                let base = path.local_times[0].level;
                let j = base + (alpha - 1.0) / alpha * path.kappa[i];
                if path.values[i] - j <= 1e-12 {
                    1.0
                } else {
                    0.0
                }
            }))
        }
        ModelSpec::SkewBm { alpha, .. } => {
            if (alpha - 0.5).abs() < 1e-12 {
                return Err(ArbError::UnsupportedModel(
                    "skew model with alpha = 1/2 has no singular component".into(),
                ));
            }
            let sign = if alpha > 0.5 { 1.0 } else { -1.0 };
            Ok(Strategy::new("increasing_profit", 0.0, move |i, path: &SamplePath| {
                if path.values[i].abs() <= 1e-12 {
                    sign
                } else {
                    0.0
                }
            }))
        }
        ModelSpec::DoublyReflectedBm { k1, k2, .. } => {
            Ok(Strategy::new("increasing_profit", 0.0, move |i, path: &SamplePath| {
                let s = path.values[i];
                if s <= k1 + 1e-12 {
                    1.0
                } else if s >= k2 - 1e-12 {
                    -1.0
                } else {
                    0.0
                }
            }))
        }
        _ => Err(ArbError::UnsupportedModel(
            "increasing-profit harvesting needs a model with a singular component".into(),
        )),
    }
}
