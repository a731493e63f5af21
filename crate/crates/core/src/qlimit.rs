// SPDX-License-Identifier: Apache-2.0

//! The oscillating exponent `q_λ(t, x) = e^{−i t x/λ²}` and its smeared
//! limits as `λ → 0`:
//!
//! ```text
//! ∫φ(t) q_λ(t,x) dt → 0   (x ≠ 0),
//! ∫dx χ(x) ∫∫dt dt' φ(t) ψ(t') λ⁻² q_λ(t − t', x) → 2π χ(0) ∫φψ.
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quad::Integrator;
use crate::regression::fit_line;
use crate::{Error, Result};

pub fn q_lambda(t: f64, x: f64, lambda: f64) -> Complex64 {
    let phase = -(t / (lambda * lambda)) * x;
    Complex64::from_polar(1.0, phase)
}

/// Smooth rapidly decaying test function of time (or detuning).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    /// `exp(−((t − center)/width)²)`
    Gaussian { center: f64, width: f64 },
}

impl TestFunction {
    pub fn gaussian(center: f64, width: f64) -> Self {
        TestFunction::Gaussian { center, width }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TestFunction::Gaussian { center, width } => {
                let u = (t - center) / width;
                (-u * u).exp()
            }
        }
    }

    /// Analytic continuation to complex arguments.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        match *self {
            TestFunction::Gaussian { center, width } => {
                let u = (z - center) / width;
                (-u * u).exp()
            }
        }
    }

    pub fn center(&self) -> f64 {
        match *self {
            TestFunction::Gaussian { center, .. } => center,
        }
    }

    pub fn width(&self) -> f64 {
        match *self {
            TestFunction::Gaussian { width, .. } => width,
        }
    }

    pub fn integral(&self) -> f64 {
        self.width() * PI.sqrt()
    }

    /// `∫φ(t) e^{−iωt} dt`.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        let (c, w) = (self.center(), self.width());
        Complex64::from_polar(
            w * PI.sqrt() * (-omega * omega * w * w / 4.0).exp(),
            -omega * c,
        )
    }

    /// `∫φ(t) ψ(t) dt`.
    pub fn overlap(&self, other: &TestFunction) -> f64 {
        let (c1, w1) = (self.center(), self.width());
        let (c2, w2) = (other.center(), other.width());
        let s = w1 * w1 + w2 * w2;
        (PI * w1 * w1 * w2 * w2 / s).sqrt() * (-(c1 - c2) * (c1 - c2) / s).exp()
    }

    /// Interval outside which the function is below `e^{−sigma²}`.
    pub fn support(&self, sigma: f64) -> (f64, f64) {
        let (c, w) = (self.center(), self.width());
        (c - sigma * w, c + sigma * w)
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let (c, w) = (self.center(), self.width());
        let mut v = Vec::new();
        if !c.is_finite() {
            v.push(format!("{prefix}.center must be finite (got {c})"));
        }
        if !(w.is_finite() && w > 0.0) {
            v.push(format!("{prefix}.width must be finite and > 0 (got {w})"));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub lambdas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub limit_target: Complex64,
    /// Slope of `ln|value − target|` against `ln λ`; infinite when fewer than
    /// two errors are representable.
    pub fitted_order: f64,
}

impl ConvergenceReport {
    pub(crate) fn new(lambdas: Vec<f64>, values: Vec<Complex64>, limit_target: Complex64) -> Self {
        let fitted_order = fitted_order(&lambdas, &values, limit_target);
        ConvergenceReport {
            lambdas,
            values,
            limit_target,
            fitted_order,
        }
    }

    pub fn errors(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| (v - self.limit_target).norm())
            .collect()
    }
}

fn fitted_order(lambdas: &[f64], values: &[Complex64], target: Complex64) -> f64 {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (l, v) in lambdas.iter().zip(values) {
        let e = (v - target).norm();
        if e > 0.0 && e.is_finite() {
            x.push(l.ln());
            y.push(e.ln());
        }
    }
    fit_line(&x, &y).map_or(f64::INFINITY, |f| f.slope)
}

/// `0.5·2^{−j}`, `j = 0..6`.
pub fn default_lambdas() -> Vec<f64> {
    (0..6).map(|j| 0.5 * 0.5f64.powi(j)).collect()
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::invalid("lambdas", "must not be empty"));
    }
    if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::invalid("lambdas", "every λ must be finite and > 0"));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("lambdas", "must be strictly decreasing"));
    }
    Ok(())
}

fn check_test_function(phi: &TestFunction, name: &str) -> Result<()> {
    let v = phi.violations(name);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::invalid("test_function", v.join("; ")))
    }
}

const SUPPORT_SIGMA: f64 = 10.0;

fn tight() -> Integrator {
    Integrator::new(1e-13, 1e-300, 4000)
}

fn nonconvergence(context: &'static str) -> impl Fn(crate::quad::QuadError) -> Error {
    move |e| Error::NonConvergence {
        context,
        achieved: e.achieved,
        requested: e.requested,
    }
}

/// `∫φ(t) q_λ(t,x) dt` for any `x`, including `x = 0`.
///
/// The Gaussian is entire, so the line of integration is moved to
/// `Im t = −ω w²/2`, `ω = x/λ²`, where the integrand no longer oscillates and
/// exponentially small results keep full relative precision.
pub fn smeared_q_value(phi: &TestFunction, x: f64, lambda: f64) -> Result<Complex64> {
    let omega = x / (lambda * lambda);
    let w = phi.width();
    let eta = omega * w * w / 2.0;
    let (lo, hi) = phi.support(SUPPORT_SIGMA);
    tight()
        .integrate(
            |u: f64| {
                let z = Complex64::new(u, -eta);
                // One exponent: the two factors overflow separately.
                let v = (z - phi.center()) / w;
                (-v * v - Complex64::new(0.0, omega) * z).exp()
            },
            &[lo, phi.center(), hi],
        )
        .map(|e| e.value)
        .map_err(nonconvergence("smeared oscillating exponent"))
}

pub fn smeared_q_limit(phi: &TestFunction, x: f64, lambdas: &[f64]) -> Result<ConvergenceReport> {
    check_test_function(phi, "phi")?;
    check_lambdas(lambdas)?;
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!(
            "the oscillating exponent only vanishes for x ≠ 0 (got x = {x})"
        )));
    }
    let values = lambdas
        .par_iter()
        .map(|&l| smeared_q_value(phi, x, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(
        lambdas.to_vec(),
        values,
        Complex64::default(),
    ))
}

/// `∫ds χ̂(s) Ψ(s)` with `Ψ(s) = ∫dt φ(t) ψ(t − λ²s)` and `χ̂(s) = ∫dx χ(x) e^{−isx}`,
/// the double time integral after `t' = t − λ²s`.
fn smeared_delta_value(
    phi: &TestFunction,
    psi: &TestFunction,
    chi: &TestFunction,
    lambda: f64,
) -> Result<Complex64> {
    let l2 = lambda * lambda;
    let (x_lo, x_hi) = chi.support(SUPPORT_SIGMA);
    let (t_lo, t_hi) = phi.support(SUPPORT_SIGMA);
    // χ̂ decays like exp(−s²w²/4).
    let s_half = 2.0 * SUPPORT_SIGMA / chi.width();
    // |value| ≤ 2π ∫φ sup ψ; tolerances are absolute on that scale.
    let scale = 2.0 * PI * phi.integral();
    let chi_quad = Integrator::new(1e-13, 1e-16 * chi.integral(), 4000);
    let psi_quad = Integrator::new(1e-13, 1e-16 * phi.integral(), 4000);

    let integrand = |s: f64| -> Result<Complex64> {
        let chi_hat = chi_quad
            .integrate(
                |x: f64| chi.eval(x) * Complex64::from_polar(1.0, -s * x),
                &[x_lo, chi.center(), x_hi],
            )
            .map_err(nonconvergence("detuning Fourier transform"))?
            .value;
        let shifted = psi.center() + l2 * s;
        let mut pts = vec![t_lo, phi.center(), t_hi];
        if shifted > t_lo && shifted < t_hi {
            pts.push(shifted);
        }
        pts.sort_by(f64::total_cmp);
        let big_psi = psi_quad
            .integrate(|t: f64| phi.eval(t) * psi.eval(t - l2 * s), &pts)
            .map_err(nonconvergence("time overlap"))?
            .value;
        Ok(chi_hat * big_psi)
    };

    let mut failure = None;
    let est = Integrator::new(1e-12, 1e-13 * scale, 4000)
        .integrate(
            |s: f64| match integrand(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::default()
                }
            },
            &[-s_half, 0.0, s_half],
        )
        .map_err(nonconvergence("smeared delta limit"))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

pub fn smeared_delta_limit(
    phi: &TestFunction,
    psi: &TestFunction,
    chi: &TestFunction,
    lambdas: &[f64],
) -> Result<ConvergenceReport> {
    check_test_function(phi, "phi")?;
    check_test_function(psi, "psi")?;
    check_test_function(chi, "chi")?;
    check_lambdas(lambdas)?;
    let values = lambdas
        .par_iter()
        .map(|&l| smeared_delta_value(phi, psi, chi, l))
        .collect::<Result<Vec<_>>>()?;
    let target = Complex64::new(2.0 * PI * chi.eval(0.0) * phi.overlap(psi), 0.0);
    Ok(ConvergenceReport::new(lambdas.to_vec(), values, target))
}

/// `∫_t^{t+dt} q_λ(τ,x) dτ` in closed form.
pub fn lemma_oscillatory_factor(t: f64, dt: f64, x: f64, lambda: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(dt, 0.0);
    }
    let omega = x / (lambda * lambda);
    // e^{−iω(t+dt/2)} · 2 sin(ω dt/2)/ω avoids cancellation between the endpoints.
    let mid = Complex64::from_polar(1.0, -omega * (t + 0.5 * dt));
    mid * (2.0 * (0.5 * omega * dt).sin() / omega)
}
