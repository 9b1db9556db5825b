//! Reference prices: Bachelier knock-out functionals, Black–Scholes barrier
//! calls, Bessel survival probabilities, and a finite-difference solver for
//! the barrier PDE.

pub mod closed;
mod pde;

pub use pde::{pde_barrier_solve, PdeGrid, PdeSurface};

use serde::{Deserialize, Serialize};

use crate::error::{ArbError, Result};
use crate::math::gauss::{norm_cdf, pdf_var};
use crate::math::quad::integrate;

/// Default absolute tolerance of the pricing quadrature, in price units.
pub const QUAD_TOL: f64 = 1e-8;

/// Claim payoff at maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayoffKind {
    Call { strike: f64 },
    Put { strike: f64 },
    /// Pays one unit (the knock-out version prices the survival event).
    Digital,
    /// Tabulated payoff with linear interpolation between abscissae and
    /// constant extrapolation outside the table.
    Custom { xs: Vec<f64>, ys: Vec<f64> },
}

/// Maturity-T claim descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payoff {
    #[serde(flatten)]
    pub kind: PayoffKind,
    pub maturity: f64,
}

impl Payoff {
    pub fn call(strike: f64, maturity: f64) -> Self {
        Payoff { kind: PayoffKind::Call { strike }, maturity }
    }

    pub fn put(strike: f64, maturity: f64) -> Self {
        Payoff { kind: PayoffKind::Put { strike }, maturity }
    }

    pub fn digital(maturity: f64) -> Self {
        Payoff { kind: PayoffKind::Digital, maturity }
    }

    pub fn custom(xs: Vec<f64>, ys: Vec<f64>, maturity: f64) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(ArbError::Parameter("custom payoff needs >= 2 points".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ArbError::Parameter("custom payoff abscissae must increase".into()));
        }
        if ys.iter().any(|y| !y.is_finite() || *y < 0.0) {
            return Err(ArbError::Parameter("custom payoff must be finite and nonnegative".into()));
        }
        Ok(Payoff { kind: PayoffKind::Custom { xs, ys }, maturity })
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            PayoffKind::Call { strike } | PayoffKind::Put { strike } => {
                if *strike < 0.0 {
                    return Err(ArbError::Parameter("strike must be nonnegative".into()));
                }
            }
            PayoffKind::Digital => {}
            PayoffKind::Custom { xs, ys } => {
                if xs.len() != ys.len() || xs.len() < 2 || xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(ArbError::Parameter("malformed custom payoff table".into()));
                }
            }
        }
        if self.maturity < 0.0 {
            return Err(ArbError::Parameter("maturity must be nonnegative".into()));
        }
        Ok(())
    }

    /// Evaluate the payoff at price level `s`.
    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            PayoffKind::Call { strike } => (s - strike).max(0.0),
            PayoffKind::Put { strike } => (strike - s).max(0.0),
            PayoffKind::Digital => 1.0,
            PayoffKind::Custom { xs, ys } => {
                if s <= xs[0] {
                    return ys[0];
                }
                if s >= *xs.last().unwrap() {
                    return *ys.last().unwrap();
                }
                let i = xs.partition_point(|&x| x <= s).saturating_sub(1);
                let w = (s - xs[i]) / (xs[i + 1] - xs[i]);
                ys[i] * (1.0 - w) + ys[i + 1] * w
            }
        }
    }

    /// Abscissae where the payoff is not smooth (used to split quadrature).
    fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            PayoffKind::Call { strike } | PayoffKind::Put { strike } => vec![*strike],
            PayoffKind::Digital => vec![],
            PayoffKind::Custom { xs, .. } => xs.clone(),
        }
    }
}

/// Knock-out barrier location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierSide {
    Lower,
    Upper,
    None,
}

/// Knock-out specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub level: f64,
    pub side: BarrierSide,
}

impl BarrierSpec {
    pub fn lower(level: f64) -> Self {
        BarrierSpec { level, side: BarrierSide::Lower }
    }

    pub fn none() -> Self {
        BarrierSpec { level: 0.0, side: BarrierSide::None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.level < 0.0 && self.side != BarrierSide::None {
            return Err(ArbError::Parameter("barrier level must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Bachelier knock-out price
/// `Psi^g(tau, x, j) = int_{y>j} g(y) [phi_tau(y-x) - phi_tau(y+x-2j)] dy`
/// by adaptive quadrature; unbarriered claims get the plain Gaussian
/// expectation. An upper barrier is priced by mirroring the problem across
/// the level.
pub fn bachelier_knockout(g: &Payoff, tau: f64, x: f64, barrier: &BarrierSpec) -> Result<f64> {
    bachelier_knockout_with_tol(g, tau, x, barrier, QUAD_TOL)
}

/// Quadrature tolerance exposed for convergence studies.
pub fn bachelier_knockout_with_tol(
    g: &Payoff,
    tau: f64,
    x: f64,
    barrier: &BarrierSpec,
    tol: f64,
) -> Result<f64> {
    g.validate()?;
    barrier.validate()?;
    if tau < 0.0 {
        return Err(ArbError::Parameter("tau must be nonnegative".into()));
    }
    match barrier.side {
        BarrierSide::None => {
            if tau == 0.0 {
                return Ok(g.eval(x));
            }
            gaussian_expectation(g, tau, x, tol)
        }
        BarrierSide::Lower => {
            let j = barrier.level;
            if x < j {
                return Err(ArbError::Domain(format!(
                    "lower-barrier price needs x >= j, got x={x}, j={j}"
                )));
            }
            if tau == 0.0 {
                return Ok(if x > j { g.eval(x) } else { 0.0 });
            }
            knockout_integral(|y| g.eval(y), g.kinks(), tau, x, j, tol)
        }
        BarrierSide::Upper => {
            let j = barrier.level;
            if x > j {
                return Err(ArbError::Domain(format!(
                    "upper-barrier price needs x <= j, got x={x}, j={j}"
                )));
            }
            if tau == 0.0 {
                return Ok(if x < j { g.eval(x) } else { 0.0 });
            }
            // mirror across j: price the lower-barrier claim on the
            // reflected payoff
            let kinks: Vec<f64> = g.kinks().iter().map(|k| 2.0 * j - k).collect();
            knockout_integral(|y| g.eval(2.0 * j - y), kinks, tau, 2.0 * j - x, j, tol)
        }
    }
}

fn gaussian_expectation(g: &Payoff, tau: f64, x: f64, tol: f64) -> Result<f64> {
    let width = 10.0 * tau.sqrt();
    let mut points = vec![x - width, x + width];
    for k in g.kinks() {
        if k > x - width && k < x + width {
            points.push(k);
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(|y| g.eval(y) * pdf_var(y - x, tau), w[0], w[1], tol)?;
    }
    Ok(total)
}

fn knockout_integral<F: Fn(f64) -> f64>(
    g: F,
    kinks: Vec<f64>,
    tau: f64,
    x: f64,
    j: f64,
    tol: f64,
) -> Result<f64> {
    let width = 10.0 * tau.sqrt();
    let hi = (x + width).max(j + width);
    let mut points = vec![j, hi];
    for k in kinks {
        if k > j && k < hi {
            points.push(k);
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(
            |y| g(y) * (pdf_var(y - x, tau) - pdf_var(y + x - 2.0 * j, tau)),
            w[0],
            w[1],
            tol,
        )?;
    }
    Ok(total)
}

/// First and second spatial derivatives and the barrier sensitivity of the
/// Bachelier knock-out price, by differentiation under the integral.
///
/// At `x == j` the one-sided convention applies: the first derivative is the
/// average of the one-sided limits (the knocked-out side contributes 0) and
/// the second slot carries the jump of the first derivative.
pub fn bachelier_knockout_greeks(
    g: &Payoff,
    tau: f64,
    x: f64,
    barrier: &BarrierSpec,
) -> Result<(f64, f64, f64)> {
    g.validate()?;
    barrier.validate()?;
    if tau <= 0.0 {
        return Err(ArbError::Parameter("greeks need tau > 0".into()));
    }
    let tol = QUAD_TOL;
    match barrier.side {
        BarrierSide::None => {
            let width = 12.0 * tau.sqrt();
            let (lo, hi) = (x - width, x + width);
            let dx = split_integrate(g, lo, hi, tol, |y| {
                g.eval(y) * (y - x) / tau * pdf_var(y - x, tau)
            })?;
            let dxx = split_integrate(g, lo, hi, tol, |y| {
                g.eval(y) * (((y - x) * (y - x)) / (tau * tau) - 1.0 / tau) * pdf_var(y - x, tau)
            })?;
            Ok((dx, dxx, 0.0))
        }
        BarrierSide::Lower => {
            let j = barrier.level;
            if x < j {
                return Err(ArbError::Domain("greeks need x >= j".into()));
            }
            let width = 12.0 * tau.sqrt();
            let hi = (x + width).max(j + width);
            let right_dx = split_integrate(g, j, hi, tol, |y| {
                g.eval(y)
                    * ((y - x) / tau * pdf_var(y - x, tau)
                        + (y + x - 2.0 * j) / tau * pdf_var(y + x - 2.0 * j, tau))
            })?;
            let dj = split_integrate(g, j, hi, tol, |y| {
                -2.0 * g.eval(y) * (y + x - 2.0 * j) / tau * pdf_var(y + x - 2.0 * j, tau)
            })?;
            if x == j {
                // value vanishes below the barrier, so the left limit is 0
                Ok((0.5 * right_dx, right_dx, dj))
            } else {
                let dxx = split_integrate(g, j, hi, tol, |y| {
                    let a = y - x;
                    let b = y + x - 2.0 * j;
                    g.eval(y)
                        * ((a * a / (tau * tau) - 1.0 / tau) * pdf_var(a, tau)
                            - (b * b / (tau * tau) - 1.0 / tau) * pdf_var(b, tau))
                })?;
                Ok((right_dx, dxx, dj))
            }
        }
        BarrierSide::Upper => Err(ArbError::UnsupportedModel(
            "upper-barrier greeks are not needed by any strategy; mirror the problem".into(),
        )),
    }
}

fn split_integrate<F: Fn(f64) -> f64>(
    g: &Payoff,
    lo: f64,
    hi: f64,
    tol: f64,
    f: F,
) -> Result<f64> {
    let mut points = vec![lo, hi];
    for k in g.kinks() {
        if k > lo && k < hi {
            points.push(k);
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(&f, w[0], w[1], tol)?;
    }
    Ok(total)
}

/// Survival probability of a Brownian motion above 0:
/// `Psi(tau, x) = 2 Phi(x / sqrt(tau)) - 1`.
pub fn bessel_survival(tau: f64, x: f64) -> f64 {
    if tau <= 0.0 {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    2.0 * norm_cdf(x.max(0.0) / tau.sqrt()) - 1.0
}
