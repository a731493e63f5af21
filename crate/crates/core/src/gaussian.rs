// SPDX-License-Identifier: Apache-2.0

//! Closed-form multivariate Gaussian integrals
//!
//! ```text
//! ∫ exp(−½ yᵀM y + bᵀy + c) dⁿy = (2π)^{n/2} det(M)^{−1/2} exp(½ bᵀM⁻¹b + c)
//! ```
//!
//! for real symmetric positive definite `M` and complex `b`, `c`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Logarithm of the integral; `exp` of it may underflow harmlessly.
pub(crate) fn log_gaussian_integral(
    m: &DMatrix<f64>,
    b: &[Complex64],
    c: Complex64,
) -> Result<Complex64> {
    let n = m.nrows();
    debug_assert_eq!(b.len(), n);
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularInput("quadratic form is not positive definite".into()))?;
    let log_det: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let br = DVector::from_iterator(n, b.iter().map(|z| z.re));
    let bi = DVector::from_iterator(n, b.iter().map(|z| z.im));
    let xr = chol.solve(&br);
    let xi = chol.solve(&bi);
    // bᵀM⁻¹b without conjugation.
    let quad = Complex64::new(br.dot(&xr) - bi.dot(&xi), br.dot(&xi) + bi.dot(&xr));
    let n_f = n as f64;
    Ok(0.5 * n_f * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det + 0.5 * quad + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_fourier() {
        // ∫ e^{−t²} e^{−iωt} dt = √π e^{−ω²/4}
        let m = DMatrix::from_element(1, 1, 2.0);
        let w = 1.7;
        let v = log_gaussian_integral(&m, &[Complex64::new(0.0, -w)], Complex64::default())
            .unwrap()
            .exp();
        let exact = std::f64::consts::PI.sqrt() * (-w * w / 4.0).exp();
        assert!((v - exact).norm() < 1e-14);
    }

    #[test]
    fn two_dimensional_correlated() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let v = log_gaussian_integral(&m, &[Complex64::default(); 2], Complex64::default())
            .unwrap()
            .exp();
        let exact = 2.0 * std::f64::consts::PI / 1.75f64.sqrt();
        assert!((v.re - exact).abs() < 1e-13 && v.im.abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(
            log_gaussian_integral(&m, &[Complex64::default(); 2], Complex64::default()).is_err()
        );
    }
}
