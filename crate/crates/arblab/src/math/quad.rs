//! Adaptive Gauss–Kronrod quadrature (G7/K15) with interval bisection.
//!
//! Suited to the smooth Gaussian kernels used throughout the crate; payoff
//! kinks are handled by splitting the integration domain at the kink before
//! calling in.

use crate::error::{ArbError, Result};

// 15-point Kronrod abscissae on [-1, 1] (symmetric; nonnegative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

// Kronrod weights for the points above.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss-7 weights, aligned with the odd Kronrod abscissae.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fp, fm) = if x == 0.0 {
            let v = f(c);
            (v, 0.0)
        } else {
            (f(c + h * x), f(c - h * x))
        };
        let s = if x == 0.0 { fp } else { fp + fm };
        kron += wk * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        } else if x == 0.0 {
            // center point belongs to the Gauss rule (i == 7 is odd; unreachable)
        }
    }
    // center point (i == 7) is odd-indexed so it entered the Gauss sum above
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).abs())
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Bisects the worst panel until the summed error estimate meets `tol` or the
/// subdivision budget is exhausted.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(ArbError::Quadrature("nonfinite integration bounds".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let (sign, lo, hi) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    // (neg error, lo, hi, value, err) — max-heap on error via sorted Vec.
    let (v0, e0) = gk15(&f, lo, hi);
    let mut panels: Vec<(f64, f64, f64, f64)> = vec![(lo, hi, v0, e0)];
    let mut total_err = e0;
    let mut total_val = v0;
    let max_panels = 4096;
    while total_err > tol && panels.len() < max_panels {
        // split the panel with the largest error estimate
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // interval at floating-point resolution; keep and give up on it
            panels.push((pa, pb, pv, 0.0));
            total_err -= pe;
            continue;
        }
        let (vl, el) = gk15(&f, pa, mid);
        let (vr, er) = gk15(&f, mid, pb);
        total_val += vl + vr - pv;
        total_err += el + er - pe;
        panels.push((pa, mid, vl, el));
        panels.push((mid, pb, vr, er));
    }
    if total_err > tol.max(1e-12 * total_val.abs()) && panels.len() >= max_panels {
        return Err(ArbError::Quadrature(format!(
            "failed to reach tolerance {tol:.2e}; error estimate {total_err:.2e}"
        )));
    }
    Ok(sign * total_val)
}
