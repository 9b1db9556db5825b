//! Standard-normal primitives and the Bachelier building block
//! `E[(m + sqrt(v) Z)_+]`.

use statrs::function::erf::erfc;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, accurate to full double precision.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Centered Gaussian density with variance `v`, evaluated at `z`.
#[inline]
pub fn pdf_var(z: f64, v: f64) -> f64 {
    norm_pdf(z / v.sqrt()) / v.sqrt()
}

/// `E[(m + sqrt(v) Z)_+]` for standard normal `Z`; the Bachelier call kernel.
///
/// Degenerates to `m_+` as `v -> 0`.
#[inline]
pub fn bachelier_call_core(m: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return m.max(0.0);
    }
    let s = v.sqrt();
    let d = m / s;
    m * norm_cdf(d) + s * norm_pdf(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_matches_tabulated_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        // the erfc backend is accurate to a few 1e-11
        assert!((norm_cdf(1.0) - 0.841_344_746_068_543).abs() < 1e-10);
        assert!((norm_cdf(-1.96) - 0.024_997_895_148_220_43).abs() < 1e-10);
    }

    #[test]
    fn bachelier_core_limits() {
        assert!((bachelier_call_core(2.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((bachelier_call_core(-2.0, 0.0)).abs() < 1e-15);
        // symmetric identity E[(m+Z)_+] - E[(-m+Z)_+] = m
        let v = 1.7;
        let m = 0.42;
        let diff = bachelier_call_core(m, v) - bachelier_call_core(-m, v);
        assert!((diff - m).abs() < 1e-14);
    }
}
