//! Future-infimum enlargement for transient models.
//!
//! `J_t = inf_{u > t} S_u` is assembled backward from per-step minima and a
//! single post-horizon tail draw. The tail is sampled from the exact
//! scale-function law of the infimum given the terminal value, so the horizon
//! never needs extending. For the Bessel(3) model the per-step minima are
//! Brownian-bridge samples rather than bare grid values: grid-only minima
//! overstate `J` by O(sqrt(dt)) in a way that inflates the quadratic
//! variation of `S - 2J`, and the bridge draws restore the joint law of
//! (grid values, within-step minima) at O(dt) accuracy.

use rand::Rng;

use crate::error::{ArbError, Result};
use crate::math::bridge::sample_bridge_min;
use crate::paths::model::ModelSpec;
use crate::paths::rng::RngSpec;
use crate::paths::sample::SamplePath;

/// Fill `path.future_inf` for a model that is transient toward +infinity.
pub fn future_infimum(path: &mut SamplePath, model: &ModelSpec, rng: &RngSpec) -> Result<()> {
    if !model.is_transient_up() {
        return Err(ArbError::UnsupportedModel(format!(
            "future infimum requires a model transient toward +infinity, got {model:?}"
        )));
    }
    let n = path.n_steps();
    let dt = path.grid.dt();
    let mut overlay = rng.overlay_stream();

    if let ModelSpec::LocalTimeAlpha { s0, beta0_abs, alpha } = *model {
        // alpha = 2: S - (s0 - |beta0|) is a Bessel(3) whose future infimum
        // is exactly the boundary level, known on-path from kappa
        debug_assert!((alpha - 2.0).abs() < 1e-12);
        let base = s0 - beta0_abs;
        let j: Vec<f64> = path.kappa.iter().map(|k| base + k / alpha * (alpha - 1.0)).collect();
        path.future_inf = Some(j);
        return Ok(());
    }

    if path.absorbed_at.is_some() {
        path.future_inf = Some(vec![0.0; n + 1]);
        return Ok(());
    }

    let terminal = path.terminal();
    let tail = sample_tail_infimum(model, terminal, overlay.random::<f64>())?;

    let use_bridge = matches!(model, ModelSpec::Bessel3 { .. });
    let mut j = vec![0.0; n + 1];
    j[n] = tail.min(terminal);
    for i in (0..n).rev() {
        let step_min = if use_bridge {
            let u: f64 = overlay.random::<f64>();
            sample_bridge_min(path.values[i], path.values[i + 1], dt, u).max(0.0)
        } else {
            path.values[i].min(path.values[i + 1])
        };
        j[i] = j[i + 1].min(step_min);
    }
    // J_t is the infimum over (t, t_end]; clamp against the value track so
    // floating-point noise cannot violate J <= S
    for i in 0..=n {
        j[i] = j[i].min(path.values[i]);
    }
    path.future_inf = Some(j);
    Ok(())
}

/// Sample the all-future infimum of the model restarted at `x`, using the
/// scale-function hitting law `P[inf <= a | x] = sbar(x)/sbar(a)`.
fn sample_tail_infimum(model: &ModelSpec, x: f64, u: f64) -> Result<f64> {
    let u = u.clamp(f64::MIN_POSITIVE, 1.0);
    match *model {
        // s(y) = -1/y: P[inf <= a | x] = a/x
        ModelSpec::Bessel3 { .. } => Ok(x * u),
        // s(y) ~ -y^(-2 nu): P[inf <= a | x] = (a/x)^(2 nu)
        ModelSpec::BesselIndex { nu, .. } if nu > 0.0 => Ok(x * u.powf(1.0 / (2.0 * nu))),
        // s(y) ~ -y^(1 - delta/2): P[inf <= a | x] = (a/x)^(delta/2 - 1)
        ModelSpec::SquaredBessel { delta, .. } if delta > 2.0 => {
            Ok(x * u.powf(1.0 / (0.5 * delta - 1.0)))
        }
        _ => Err(ArbError::UnsupportedModel(
            "no scale-function tail law for this model".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::stats::MeanVar;
    use crate::paths::grid::TimeGrid;
    use crate::paths::simulate::simulate;

    #[test]
    fn recurrent_model_is_rejected() {
        let model = ModelSpec::SkewBm { s0: 1.0, alpha: 0.6 };
        let grid = TimeGrid::new(0.0, 1.0, 16).unwrap();
        let mut path = simulate(&model, &grid, &RngSpec::new(1, 0)).unwrap();
        assert!(future_infimum(&mut path, &model, &RngSpec::new(1, 0)).is_err());
    }

    #[test]
    fn future_inf_is_monotone_and_dominated() {
        let model = ModelSpec::Bessel3 { x0: 1.0 };
        let grid = TimeGrid::new(0.0, 1.0, 500).unwrap();
        for k in 0..20 {
            let spec = RngSpec::new(8, k);
            let mut path = simulate(&model, &grid, &spec).unwrap();
            future_infimum(&mut path, &model, &spec).unwrap();
            path.validate().unwrap();
            let j = path.future_inf.as_ref().unwrap();
            for i in 0..j.len() - 1 {
                assert!(j[i] <= j[i + 1] + 1e-12);
                assert!(j[i] <= path.values[i] + 1e-12);
            }
        }
    }

    #[test]
    fn constant_path_tail_is_uniform_scaled() {
        // With the path pinned at x, the Bessel(3) tail law gives J ~ x U;
        // check the sample mean against x/2 by Monte Carlo.
        let x = 2.0;
        let model = ModelSpec::Bessel3 { x0: x };
        let mut acc = MeanVar::new();
        for k in 0..4_000 {
            let u: f64 = RngSpec::new(77, k).overlay_stream().random();
            let tail = sample_tail_infimum(&model, x, u).unwrap();
            assert!((0.0..=x).contains(&tail));
            acc.push(tail);
        }
        let err = (acc.mean() - x / 2.0).abs();
        assert!(err < 4.0 * acc.std_error(), "mean {} err {err}", acc.mean());
    }

    #[test]
    fn absorbed_path_has_zero_future_inf() {
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let model = ModelSpec::Bessel3 { x0: 1.0 };
        let spec = RngSpec::new(3, 0);
        let mut path = simulate(&model, &grid, &spec).unwrap();
        // force an absorbed state to exercise the zero branch
        path.absorbed_at = Some(50);
        for v in path.values.iter_mut().skip(50) {
            *v = 0.0;
        }
        for d in path.driver_increments.iter_mut().skip(50) {
            *d = 0.0;
        }
        future_infimum(&mut path, &model, &spec).unwrap();
        assert!(path.future_inf.unwrap().iter().all(|&x| x == 0.0));
    }
}
