//! Scale functions, Lamperti maps, and the repurchase/issuance transforms.

use std::fmt;
use std::sync::Arc;

use crate::error::{ArbError, Result};
use crate::math::quad::integrate;

/// Diffusion coefficient families with recognized closed-form scale data.
#[derive(Clone)]
pub enum ScaleFamily {
    /// `sigma = 1, mu = 0`.
    Bm,
    /// `sigma(y) = sigma y, mu(y) = mu y`.
    Gbm { mu: f64, sigma: f64 },
    /// `sigma(y) = 2 sqrt(y), mu(y) = delta`.
    Besq { delta: f64 },
    /// `sigma(y) = -y^2, mu(y) = y^3`.
    InverseSquare,
    /// Tabulated coefficients; scale data by quadrature.
    Numeric {
        mu: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        sigma: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ScaleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleFamily::Bm => write!(f, "Bm"),
            ScaleFamily::Gbm { mu, sigma } => write!(f, "Gbm{{mu:{mu},sigma:{sigma}}}"),
            ScaleFamily::Besq { delta } => write!(f, "Besq{{delta:{delta}}}"),
            ScaleFamily::InverseSquare => write!(f, "InverseSquare"),
            ScaleFamily::Numeric { .. } => write!(f, "Numeric"),
        }
    }
}

/// Whether the fundraiser repurchases (`f` increasing, `f(0) = 0` minimal)
/// or issues (`f` decreasing, `f(infinity) = 0` minimal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FundingMode {
    Repurchase,
    Issuance,
}

/// Scale data of a diffusion together with the affine adjustment `f` chosen
/// by the funding mode: `s(Y0) = 0`, `s'(Y0) = 1`, `psi(Y0) = 0`,
/// `f = +-s + C` with the minimal constant plus a nonnegative offset.
#[derive(Debug, Clone)]
pub struct ScaleTransform {
    family: ScaleFamily,
    pub mode: FundingMode,
    pub y0: f64,
    /// Extra offset above the minimal constant choice.
    pub c_extra: f64,
    s_at_zero: Option<f64>,
    s_at_inf: Option<f64>,
}

const NUMERIC_TOL: f64 = 1e-10;

impl ScaleTransform {
    /// Positive diffusion magnitude `|sigma(y)|`.
    pub fn sigma_pos(&self, y: f64) -> f64 {
        match &self.family {
            ScaleFamily::Bm => 1.0,
            ScaleFamily::Gbm { sigma, .. } => sigma.abs() * y,
            ScaleFamily::Besq { .. } => 2.0 * y.max(0.0).sqrt(),
            ScaleFamily::InverseSquare => y * y,
            ScaleFamily::Numeric { sigma, .. } => sigma(y).abs(),
        }
    }

    fn mu(&self, y: f64) -> f64 {
        match &self.family {
            ScaleFamily::Bm => 0.0,
            ScaleFamily::Gbm { mu, .. } => mu * y,
            ScaleFamily::Besq { delta } => *delta,
            ScaleFamily::InverseSquare => y * y * y,
            ScaleFamily::Numeric { mu, .. } => mu(y),
        }
    }

    /// `s'(y) = exp(-2 int_{Y0}^y mu/sigma^2)`.
    pub fn s_prime(&self, y: f64) -> f64 {
        let y0 = self.y0;
        match &self.family {
            ScaleFamily::Bm => 1.0,
            ScaleFamily::Gbm { mu, sigma } => {
                let alpha = 1.0 - 2.0 * mu / (sigma * sigma);
                (y / y0).powf(alpha - 1.0)
            }
            ScaleFamily::Besq { delta } => (y / y0).powf(-0.5 * delta),
            ScaleFamily::InverseSquare => (y0 / y) * (y0 / y),
            ScaleFamily::Numeric { .. } => {
                let inner = integrate(
                    |eta| 2.0 * self.mu(eta) / (self.sigma_pos(eta) * self.sigma_pos(eta)),
                    y0,
                    y,
                    NUMERIC_TOL,
                )
                .unwrap_or(f64::NAN);
                (-inner).exp()
            }
        }
    }

    /// Scale function with `s(Y0) = 0`.
    pub fn s(&self, y: f64) -> f64 {
        let y0 = self.y0;
        match &self.family {
            ScaleFamily::Bm => y - y0,
            ScaleFamily::Gbm { mu, sigma } => {
                let alpha = 1.0 - 2.0 * mu / (sigma * sigma);
                if alpha.abs() < 1e-14 {
                    y0 * (y / y0).ln()
                } else {
                    y0 / alpha * ((y / y0).powf(alpha) - 1.0)
                }
            }
            ScaleFamily::Besq { delta } => {
                let e = 1.0 - 0.5 * delta;
                if e.abs() < 1e-14 {
                    y0 * (y / y0).ln()
                } else {
                    y0 / e * ((y / y0).powf(e) - 1.0)
                }
            }
            ScaleFamily::InverseSquare => y0 * (1.0 - y0 / y),
            ScaleFamily::Numeric { .. } => {
                integrate(|eta| self.s_prime(eta), y0, y, NUMERIC_TOL).unwrap_or(f64::NAN)
            }
        }
    }

    /// Lamperti map `psi(y) = int_{Y0}^y d eta / sigma_eff(eta)`, oriented by
    /// the funding mode's sign convention for sigma.
    pub fn psi(&self, y: f64) -> f64 {
        let sign = match self.mode {
            FundingMode::Repurchase => 1.0,
            FundingMode::Issuance => -1.0,
        };
        let y0 = self.y0;
        let raw = match &self.family {
            ScaleFamily::Bm => y - y0,
            ScaleFamily::Gbm { sigma, .. } => (y / y0).ln() / sigma.abs(),
            ScaleFamily::Besq { .. } => y.sqrt() - y0.sqrt(),
            ScaleFamily::InverseSquare => 1.0 / y0 - 1.0 / y,
            ScaleFamily::Numeric { .. } => {
                integrate(|eta| 1.0 / self.sigma_pos(eta), y0, y, NUMERIC_TOL).unwrap_or(f64::NAN)
            }
        };
        sign * raw
    }

    /// Inverse of the Lamperti map.
    pub fn psi_inv(&self, x: f64) -> f64 {
        let sign = match self.mode {
            FundingMode::Repurchase => 1.0,
            FundingMode::Issuance => -1.0,
        };
        let x = sign * x;
        let y0 = self.y0;
        match &self.family {
            ScaleFamily::Bm => y0 + x,
            ScaleFamily::Gbm { sigma, .. } => y0 * (sigma.abs() * x).exp(),
            ScaleFamily::Besq { .. } => {
                let r = y0.sqrt() + x;
                r.max(0.0) * r.max(0.0)
            }
            ScaleFamily::InverseSquare => 1.0 / (1.0 / y0 - x),
            ScaleFamily::Numeric { .. } => {
                // monotone bisection on the positive half-line
                let (mut lo, mut hi) = (y0 * 1e-9, y0 * 1e9);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let sign2 = match self.mode {
                        FundingMode::Repurchase => 1.0,
                        FundingMode::Issuance => -1.0,
                    };
                    if sign2 * self.psi(mid) < sign2 * sign * x {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Affine adjustment `f` of the scale per the funding mode.
    pub fn f(&self, y: f64) -> f64 {
        match self.mode {
            FundingMode::Repurchase => {
                let s0 = self.s_at_zero.expect("repurchase requires finite s(0)");
                self.s(y) - s0 + self.c_extra
            }
            FundingMode::Issuance => {
                let si = self.s_at_inf.expect("issuance requires finite s(inf)");
                si - self.s(y) + self.c_extra
            }
        }
    }

    pub fn f_prime(&self, y: f64) -> f64 {
        match self.mode {
            FundingMode::Repurchase => self.s_prime(y),
            FundingMode::Issuance => -self.s_prime(y),
        }
    }

    /// `h = f o psi^{-1}`.
    pub fn h(&self, x: f64) -> f64 {
        self.f(self.psi_inv(x))
    }

    /// `T_f = f''/f' = -2 mu / sigma^2` (affine-invariant).
    pub fn t_f(&self, y: f64) -> f64 {
        let s = self.sigma_pos(y);
        -2.0 * self.mu(y) / (s * s)
    }

    /// `T_{1/f} = T_f - 2 f'/f`.
    pub fn t_one_over_f(&self, y: f64) -> f64 {
        self.t_f(y) - 2.0 * self.f_prime(y) / self.f(y)
    }

    /// Finite value of `s(0+)` when it exists.
    pub fn s_at_zero(&self) -> Option<f64> {
        self.s_at_zero
    }

    /// Finite value of `s(+inf)` when it exists.
    pub fn s_at_inf(&self) -> Option<f64> {
        self.s_at_inf
    }
}

/// Build the scale transform for a recognized family.
///
/// `c_extra >= 0` raises `f` above the minimal normalization (`f(0) = 0` for
/// repurchase, `f(inf) = 0` for issuance).
pub fn build_scale_transform(
    family: ScaleFamily,
    y0: f64,
    mode: FundingMode,
    c_extra: f64,
) -> Result<ScaleTransform> {
    if y0 <= 0.0 {
        return Err(ArbError::Parameter("Y0 must be positive".into()));
    }
    if c_extra < 0.0 {
        return Err(ArbError::Parameter("c_extra must be nonnegative".into()));
    }
    let (s_at_zero, s_at_inf) = boundary_limits(&family, y0)?;
    if s_at_zero.is_none() && s_at_inf.is_none() {
        return Err(ArbError::UnsupportedModel(
            "recurrent diffusion: both scale limits are infinite".into(),
        ));
    }
    match mode {
        FundingMode::Repurchase if s_at_zero.is_none() => {
            return Err(ArbError::UnsupportedModel(
                "repurchase needs s(0) > -infinity".into(),
            ))
        }
        FundingMode::Issuance if s_at_inf.is_none() => {
            return Err(ArbError::UnsupportedModel(
                "issuance needs s(inf) < infinity".into(),
            ))
        }
        _ => {}
    }
    Ok(ScaleTransform { family, mode, y0, c_extra, s_at_zero, s_at_inf })
}

/// Numeric-family constructor with declared boundary limits (finite scale
/// values at 0 and infinity, where they exist).
pub fn build_numeric_scale_transform(
    mu: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    sigma: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    y0: f64,
    mode: FundingMode,
    c_extra: f64,
    s_at_zero: Option<f64>,
    s_at_inf: Option<f64>,
) -> Result<ScaleTransform> {
    if y0 <= 0.0 {
        return Err(ArbError::Parameter("Y0 must be positive".into()));
    }
    if s_at_zero.is_none() && s_at_inf.is_none() {
        return Err(ArbError::UnsupportedModel(
            "recurrent diffusion: both scale limits are infinite".into(),
        ));
    }
    Ok(ScaleTransform {
        family: ScaleFamily::Numeric { mu, sigma },
        mode,
        y0,
        c_extra,
        s_at_zero,
        s_at_inf,
    })
}

fn boundary_limits(family: &ScaleFamily, y0: f64) -> Result<(Option<f64>, Option<f64>)> {
    Ok(match family {
        ScaleFamily::Bm => (Some(-y0), None),
        ScaleFamily::Gbm { mu, sigma } => {
            let alpha = 1.0 - 2.0 * mu / (sigma * sigma);
            if alpha.abs() < 1e-14 {
                (None, None)
            } else if alpha > 0.0 {
                (Some(-y0 / alpha), None)
            } else {
                (None, Some(-y0 / alpha))
            }
        }
        ScaleFamily::Besq { delta } => {
            let e = 1.0 - 0.5 * delta;
            if e.abs() < 1e-14 {
                (None, None)
            } else if e > 0.0 {
                (Some(-y0 / e), None)
            } else {
                (None, Some(-y0 / e))
            }
        }
        ScaleFamily::InverseSquare => (None, Some(y0)),
        ScaleFamily::Numeric { .. } => {
            return Err(ArbError::Indeterminate(
                "numeric families need declared boundary limits".into(),
            ))
        }
    })
}

/// Drift coefficients of the funded price process in the two filtrations.
pub struct TransformedCoefficients {
    st: ScaleTransform,
}

impl TransformedCoefficients {
    /// Drift seen by ordinary investors: `-1/2 T_{1/f} sigma^2`.
    pub fn ordinary_drift(&self, y: f64) -> f64 {
        let s = self.st.sigma_pos(y);
        -0.5 * self.st.t_one_over_f(y) * s * s
    }

    /// Absolutely continuous drift in the fundraiser's enlarged filtration:
    /// `-1/2 T_f sigma^2`; the singular term is twice the running change of
    /// the future infimum (repurchase) or future supremum (issuance).
    pub fn fundraiser_drift(&self, y: f64) -> f64 {
        let s = self.st.sigma_pos(y);
        -0.5 * self.st.t_f(y) * s * s
    }

    pub fn mode(&self) -> FundingMode {
        self.st.mode
    }
}

/// The coefficient pair of the funded model.
pub fn transformed_model(st: &ScaleTransform) -> TransformedCoefficients {
    TransformedCoefficients { st: st.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bm_repurchase_matches_displayed_transform() {
        let st = build_scale_transform(ScaleFamily::Bm, 1.0, FundingMode::Repurchase, 0.0).unwrap();
        assert!((st.s(2.0) - 1.0).abs() < 1e-14);
        assert!((st.psi(2.0) - 1.0).abs() < 1e-14);
        // f(y) = y and h(x) = x + Y0 for the minimal constant
        assert!((st.f(2.0) - 2.0).abs() < 1e-14);
        assert!((st.h(0.5) - 1.5).abs() < 1e-12);
        let tc = transformed_model(&st);
        // ordinary drift 1/y: the funded price is a Bessel(3)
        for y in [0.5, 1.0, 3.0] {
            assert!((tc.ordinary_drift(y) - 1.0 / y).abs() < 1e-12, "y={y}");
            assert!(tc.fundraiser_drift(y).abs() < 1e-14);
        }
    }

    #[test]
    fn gbm_alpha_and_scale_match_displays() {
        // sigma = 0.2, mu = 0.06 gives alpha = -2
        let st = build_scale_transform(
            ScaleFamily::Gbm { mu: 0.06, sigma: 0.2 },
            1.0,
            FundingMode::Issuance,
            0.0,
        )
        .unwrap();
        let alpha = -2.0;
        for y in [0.5, 1.0, 2.0] {
            let expect = 1.0 / alpha * ((y / 1.0f64).powf(alpha) - 1.0);
            assert!((st.s(y) - expect).abs() < 1e-12, "y={y}");
        }
        // repurchase is unavailable for alpha < 0
        assert!(build_scale_transform(
            ScaleFamily::Gbm { mu: 0.06, sigma: 0.2 },
            1.0,
            FundingMode::Repurchase,
            0.0
        )
        .is_err());
    }

    #[test]
    fn gbm_repurchase_ordinary_drift_is_mu_plus_alpha_sigma_sq() {
        let (mu, sigma) = (0.01, 0.3);
        let alpha = 1.0 - 2.0 * mu / (sigma * sigma);
        assert!(alpha > 0.0);
        let st = build_scale_transform(
            ScaleFamily::Gbm { mu, sigma },
            2.0,
            FundingMode::Repurchase,
            0.0,
        )
        .unwrap();
        let tc = transformed_model(&st);
        for y in [1.0, 2.0, 5.0] {
            let expect = (mu + alpha * sigma * sigma) * y;
            let got = tc.ordinary_drift(y);
            assert!((got - expect).abs() < 1e-10 * (1.0 + expect.abs()), "y={y}: {got} vs {expect}");
        }
    }

    #[test]
    fn inverse_square_family_matches_displays() {
        let y0 = 1.0;
        let st =
            build_scale_transform(ScaleFamily::InverseSquare, y0, FundingMode::Issuance, y0).unwrap();
        for y in [0.5, 1.0, 2.0] {
            assert!((st.s(y) - (1.0 - 1.0 / y)).abs() < 1e-12);
            assert!((st.psi(y) - -(1.0 / y0 - 1.0 / y)).abs() < 1e-12);
        }
        // f(y) = Y0^2/y + C - Y0 with C = s(inf) + c_extra = Y0 + Y0
        let c = 2.0 * y0;
        for y in [0.5, 2.0] {
            assert!((st.f(y) - (y0 * y0 / y + c - y0)).abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_quadrature_matches_closed_form_gbm() {
        let (mu, sigma) = (0.06, 0.25);
        let closed = build_scale_transform(
            ScaleFamily::Gbm { mu, sigma },
            1.0,
            FundingMode::Issuance,
            0.0,
        )
        .unwrap();
        let numeric = build_numeric_scale_transform(
            Arc::new(move |y| mu * y),
            Arc::new(move |y| sigma * y),
            1.0,
            FundingMode::Issuance,
            0.0,
            None,
            closed.s_at_inf(),
        )
        .unwrap();
        for k in 0..20 {
            let y = 0.1 + (10.0 - 0.1) * k as f64 / 19.0;
            let rel = (closed.s(y) - numeric.s(y)).abs() / (1.0 + closed.s(y).abs());
            assert!(rel < 1e-8, "s mismatch at y={y}: {rel}");
            let relp = (closed.psi(y) - numeric.psi(y)).abs() / (1.0 + closed.psi(y).abs());
            assert!(relp < 1e-8, "psi mismatch at y={y}: {relp}");
        }
    }

    #[test]
    fn affine_rescaling_leaves_t_ratios_invariant() {
        let st = build_scale_transform(
            ScaleFamily::Gbm { mu: 0.01, sigma: 0.3 },
            2.0,
            FundingMode::Repurchase,
            0.0,
        )
        .unwrap();
        // T_{1/f} built from 2f must equal the one built from f
        for y in [1.0, 2.0, 4.0] {
            let direct = st.t_one_over_f(y);
            let rescaled = st.t_f(y) - 2.0 * (2.0 * st.f_prime(y)) / (2.0 * st.f(y));
            assert!((direct - rescaled).abs() < 1e-12);
        }
    }

    #[test]
    fn besq_boundaries() {
        // dimension below 2: scale finite at 0, infinite at infinity
        let st =
            build_scale_transform(ScaleFamily::Besq { delta: 1.0 }, 1.0, FundingMode::Repurchase, 0.0)
                .unwrap();
        assert!(st.s_at_zero().is_some());
        assert!(st.s_at_inf().is_none());
        // dimension above 2: the opposite
        let st =
            build_scale_transform(ScaleFamily::Besq { delta: 3.0 }, 1.0, FundingMode::Issuance, 0.0)
                .unwrap();
        assert!(st.s_at_zero().is_none());
        assert!(st.s_at_inf().is_some());
        // dimension 2 is recurrent
        assert!(build_scale_transform(
            ScaleFamily::Besq { delta: 2.0 },
            1.0,
            FundingMode::Repurchase,
            0.0
        )
        .is_err());
    }
}
