//! Special functions shared across the crate: the standard Gaussian CDF and
//! PDF, the hard sigmoid clip, and a numerically stable logistic sigmoid.

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// erf by its Maclaurin series; accurate to near machine precision for
/// |z| <= 4 (worst-case partial-sum magnitude ~1e5 keeps the rounding error
/// around 1e-11, far inside the 1e-7 budget of `gauss_cdf`).
fn erf_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z; // (-1)^n z^(2n+1) / n!
    let mut sum = z;
    let mut n = 1.0;
    while n < 200.0 {
        term *= -z2 / n;
        let add = term / (2.0 * n + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        n += 1.0;
    }
    FRAC_2_SQRT_PI * sum
}

/// erfc for z > 4 by the asymptotic expansion
/// erfc(z) = exp(-z^2) / (z sqrt(pi)) * [1 + sum_k (-1)^k (2k-1)!! / (2 z^2)^k],
/// truncated at its smallest term (relative error ~1e-7 of an erfc that is
/// itself < 1.6e-8, so absolutely negligible).
fn erfc_asymptotic(z: f64) -> f64 {
    let inv2z2 = 1.0 / (2.0 * z * z);
    let mut term = 1.0; // (-1)^k (2k-1)!! / (2 z^2)^k
    let mut sum = 1.0;
    for k in 1..30 {
        let next = -term * (2.0 * k as f64 - 1.0) * inv2z2;
        if next.abs() >= term.abs() {
            break; // series started diverging; stop at the smallest term
        }
        term = next;
        sum += term;
        if term.abs() < 1e-20 {
            break;
        }
    }
    (-z * z).exp() / (z * std::f64::consts::PI.sqrt()) * sum
}

/// erfc(z) for z >= 0.
fn erfc_nonneg(z: f64) -> f64 {
    if z <= 4.0 {
        1.0 - erf_series(z)
    } else if z < 30.0 {
        erfc_asymptotic(z)
    } else {
        0.0
    }
}

/// Standard Gaussian CDF, absolute error below 1e-7 everywhere (in practice
/// near machine precision). Domain error on non-finite input.
pub fn gauss_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gauss_cdf needs finite x, got {x}")));
    }
    let p = if x <= 0.0 {
        0.5 * erfc_nonneg(-x / SQRT_2)
    } else {
        1.0 - 0.5 * erfc_nonneg(x / SQRT_2)
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Density of N(0, sigma^2) at x: exp(-x^2 / (2 sigma^2)) / sqrt(2 pi sigma^2).
pub fn gauss_pdf(x: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!(
            "gauss_pdf needs finite x and sigma > 0, got ({x}, {sigma})"
        )));
    }
    let s2 = sigma * sigma;
    Ok((-x * x / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt())
}

/// max(0, min(1, x)).
pub fn hard_sigmoid(x: f64) -> f64 {
    x.max(0.0).min(1.0)
}

/// Logistic sigmoid, stable in both tails.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_symmetry_and_reference_values() {
        assert_eq!(gauss_cdf(0.0).unwrap(), 0.5);
        let p1 = gauss_cdf(1.0).unwrap();
        assert!((p1 - 0.841345).abs() < 1e-6, "phi(1) = {p1}");
        let m1 = gauss_cdf(-1.0).unwrap();
        assert!((m1 - (1.0 - p1)).abs() < 1e-12);
        assert!((m1 - 0.158655).abs() < 1e-6);
    }

    #[test]
    fn cdf_rejects_non_finite() {
        assert!(gauss_cdf(f64::NAN).is_err());
        assert!(gauss_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_monotone_on_grid() {
        let mut prev = 0.0;
        let mut x = -8.0;
        while x <= 8.0 {
            let p = gauss_cdf(x).unwrap();
            assert!(p >= prev, "monotonicity broke at {x}");
            prev = p;
            x += 1.0 / 128.0;
        }
    }

    #[test]
    fn cdf_tails() {
        assert!(gauss_cdf(-10.0).unwrap() < 1e-20);
        assert!(gauss_cdf(10.0).unwrap() >= 1.0 - 1e-15);
        assert!(gauss_cdf(-40.0).unwrap() >= 0.0);
        assert_eq!(gauss_cdf(50.0).unwrap(), 1.0);
    }

    #[test]
    fn pdf_reference_values_and_symmetry() {
        let p = gauss_pdf(0.0, 1.0).unwrap();
        assert!((p - 0.398942).abs() < 1e-6);
        let q = gauss_pdf(0.5, 0.5).unwrap();
        assert!((q - 0.483941).abs() < 1e-6);
        for &(x, s) in &[(0.3, 1.0), (1.7, 0.5), (2.2, 3.0)] {
            assert_eq!(gauss_pdf(x, s).unwrap(), gauss_pdf(-x, s).unwrap());
        }
    }

    #[test]
    fn pdf_rejects_bad_sigma() {
        assert!(gauss_pdf(0.0, 0.0).is_err());
        assert!(gauss_pdf(0.0, -1.0).is_err());
    }

    #[test]
    fn hard_sigmoid_cases() {
        assert_eq!(hard_sigmoid(0.3), 0.3);
        assert_eq!(hard_sigmoid(1.5), 1.0);
        assert_eq!(hard_sigmoid(-0.2), 0.0);
    }

    #[test]
    fn sigmoid_tails_and_midpoint() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(40.0) > 1.0 - 1e-15);
        assert!(sigmoid(-40.0) < 1e-15);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }
}
