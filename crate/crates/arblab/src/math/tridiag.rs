//! Thomas algorithm for tridiagonal systems.

use crate::error::{ArbError, Result};

/// Solve `A x = d` for tridiagonal `A` given by sub-, main-, and
/// super-diagonals. `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || d.len() != n {
        return Err(ArbError::Structural("tridiagonal length mismatch".into()));
    }
    let mut c_star = vec![0.0; n];
    let mut d_star = vec![0.0; n];
    let mut denom = diag[0];
    if denom.abs() < 1e-300 {
        return Err(ArbError::Solver("singular pivot in tridiagonal solve".into()));
    }
    c_star[0] = sup[0] / denom;
    d_star[0] = d[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c_star[i - 1];
        if denom.abs() < 1e-300 {
            return Err(ArbError::Solver("singular pivot in tridiagonal solve".into()));
        }
        c_star[i] = sup[i] / denom;
        d_star[i] = (d[i] - sub[i] * d_star[i - 1]) / denom;
    }
    let mut x = d_star;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c_star[i] * next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [2 1 0; 1 2 1; 0 1 2] x = [4; 8; 8] -> x = [1; 2; 3]
        let x = solve_tridiagonal(
            &[0.0, 1.0, 1.0],
            &[2.0, 2.0, 2.0],
            &[1.0, 1.0, 0.0],
            &[4.0, 8.0, 8.0],
        )
        .unwrap();
        for (xi, ei) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((xi - ei).abs() < 1e-12);
        }
    }
}
