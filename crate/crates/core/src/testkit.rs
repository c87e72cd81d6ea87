//! Independent reference implementations used by the test suites.
//!
//! Everything here deliberately avoids the code paths it is used to check:
//! the Gaussian CDF oracle integrates the density by quadrature instead of
//! using the series in [`crate::special`], the least-squares oracle solves
//! the normal equations directly, and the LASSO oracle runs cyclic
//! coordinate descent rather than proximal gradient.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Standard normal CDF by adaptive Simpson integration of the density from
/// 0 to |x|, plus the 1/2 from symmetry. Accurate far beyond 1e-10.
pub fn gauss_cdf_quadrature(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - gauss_cdf_quadrature(-x);
    }
    if x > 12.0 {
        return 1.0;
    }
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    0.5 + simpson_adaptive(&pdf, 0.0, x, 1e-13, 40)
}

fn simpson_adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = simpson_rule(f, a, b);
    let left = simpson_rule(f, a, m);
    let right = simpson_rule(f, m, b);
    if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson_adaptive(f, a, m, tol / 2.0, depth - 1)
            + simpson_adaptive(f, m, b, tol / 2.0, depth - 1)
    }
}

fn simpson_rule(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::Shape("solve_linear needs square A and matching b".into()));
    }
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            let mut row = a.row(r).to_vec();
            row.push(b[r]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() < 1e-12 {
            return Err(Error::Degenerate("singular system".into()));
        }
        m.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let factor = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= factor * m[col][c];
                }
            }
        }
    }
    Ok((0..n).map(|r| m[r][n] / m[r][r]).collect())
}

/// Ordinary least squares through the normal equations X^T X w = X^T y.
pub fn ols_solve(x: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let xtx = x.matmul_transpose_a(x)?;
    let xty = x.transpose().matvec(y)?;
    solve_linear(&xtx, &xty)
}

/// LASSO objective (1/N) ||X w - y||^2 + alpha ||w||_1.
pub fn lasso_objective(x: &Matrix, y: &[f64], w: &[f64], alpha: f64) -> f64 {
    let n = x.rows() as f64;
    let preds = x.matvec(w).unwrap();
    let rss: f64 = preds.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    rss / n + alpha * w.iter().map(|v| v.abs()).sum::<f64>()
}

/// Cyclic coordinate descent for the LASSO, the oracle counterpart of the
/// proximal-gradient solver in [`crate::baselines`].
pub fn lasso_coordinate_descent(
    x: &Matrix,
    y: &[f64],
    alpha: f64,
    sweeps: usize,
) -> Result<Vec<f64>> {
    let n = x.rows();
    let d = x.cols();
    if y.len() != n {
        return Err(Error::Shape("lasso oracle: y length".into()));
    }
    let nf = n as f64;
    let col_sq: Vec<f64> = (0..d)
        .map(|j| x.column(j).iter().map(|v| v * v).sum::<f64>())
        .collect();
    let mut w = vec![0.0; d];
    let mut resid: Vec<f64> = y.to_vec(); // y - X w
    for _ in 0..sweeps {
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = x.column(j);
            // rho = (2/N) x_j . (resid + x_j w_j)
            let mut rho = 0.0;
            for i in 0..n {
                rho += col[i] * (resid[i] + col[i] * w[j]);
            }
            rho *= 2.0 / nf;
            let denom = 2.0 * col_sq[j] / nf;
            let new_w = soft(rho, alpha) / denom;
            if new_w != w[j] {
                let delta = new_w - w[j];
                for i in 0..n {
                    resid[i] -= delta * col[i];
                }
                w[j] = new_w;
            }
        }
    }
    Ok(w)
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Central finite difference of a scalar function.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
