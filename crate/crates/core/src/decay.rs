// SPDX-License-Identifier: Apache-2.0

//! Survival amplitude of a smeared particle state,
//!
//! ```text
//! X(t) = ∫dp |f(p)|² e^{−t (g|g)₋(p)} = 4π ∫₀^∞ p² |f(p)|² e^{−t (g|g)₋(p)} dp,
//! ```
//!
//! its Gaussian closed form under the quadratic kernel model, and power-law
//! fits of the large-time tail.
//!
//! The momentum integrand oscillates with phase `t·im (g|g)₋(p)`. The common
//! factor `e^{−t (g|g)₋(0)}` is pulled out and the range is cut into panels
//! spanning at most one local period before adaptive refinement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{FitOptions, PiecewiseChebyshev};
use crate::ggkernel::{self, SmallMomentumModel};
use crate::model::{ModelConfig, QuadratureSpec, SmearingFunction};
use crate::quad::Integrator;
use crate::regression::fit_line;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// Direct quadrature over the full rate kernel.
    Full,
    /// Quadrature over `−i(C − A p²)`.
    QuadraticModel,
    /// `e^{−itC} (π/(B − iAt))^{3/2}`; Gaussian smearing only.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub kernel_kind: KernelKind,
    /// Effective `A`: the coefficient for the model kernels, `−½ im''(0)` of
    /// the tabulated kernel for the full one.
    pub curvature: Option<f64>,
    /// Smearing width parameter `B`.
    pub width_parameter: Option<f64>,
    /// `∫|f|²dp`, the value at `t = 0`.
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass {
    PowerLaw,
    Exponential,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub exponent: f64,
    pub intercept: f64,
    pub fit_window: (f64, f64),
    /// RMS residual of the log-log line.
    pub residual: f64,
    pub classification: TailClass,
    /// Slope of `ln|X|` against `t`.
    pub exp_rate: f64,
    pub exp_residual: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum WindowRule {
    /// `t ≥ 10 B/A` when the curve carries both, else the last decade.
    Auto,
    Explicit {
        t_min: f64,
        t_max: f64,
    },
}

pub const MIN_TAIL_SAMPLES: usize = 8;

/// `(π/(B − iAt))^{3/2}` on the principal branch.
pub fn gaussian_closed_form(a: f64, b: f64, t: f64) -> Complex64 {
    let z = Complex64::new(PI, 0.0) / Complex64::new(b, -a * t);
    // arg z ∈ (−π/2, π/2) for B > 0, so the principal power is continuous in t.
    z.powf(1.5)
}

/// 64 log-spaced times over `[10⁻², 10⁴]·B/A`.
pub fn default_time_grid(a: f64, b: f64) -> Result<Vec<f64>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(
            "A",
            format!("default time grid needs A > 0, got {a}"),
        ));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid("B", format!("must be > 0, got {b}")));
    }
    Ok(log_grid(1e-2 * b / a, 1e4 * b / a, 64))
}

/// `n ≥ 2` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Tabulated rate kernel `p ↦ (g|g)₋(p)` on `[0, p_max]`.
#[derive(Debug, Clone)]
pub struct RateTable {
    table: PiecewiseChebyshev<2>,
    p_max: f64,
}

impl RateTable {
    pub fn build(model: &ModelConfig, p_max: f64, quad: &QuadratureSpec) -> Result<Self> {
        let node_quad = QuadratureSpec {
            rel_tol: quad.rel_tol.min(1e-12),
            abs_tol: quad.abs_tol.min(1e-14),
            ..*quad
        };
        let breaks: Vec<f64> = model
            .dispersion
            .constant_value()
            .map(|w| (2.0 * w).sqrt())
            .into_iter()
            .collect();
        let opts = FitOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_depth: 24,
        };
        let table = PiecewiseChebyshev::fit(
            |p: f64| ggkernel::gg_minus(model, p, &node_quad).map(|r| [r.re, r.im]),
            0.0,
            p_max,
            &breaks,
            opts,
        )?;
        Ok(RateTable { table, p_max })
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn eval(&self, p: f64) -> Complex64 {
        let [re, im] = self.table.eval(p);
        Complex64::new(re, im)
    }

    /// `−½ d²im/dp²` at `p = 0`.
    pub fn effective_curvature(&self) -> f64 {
        -0.5 * self.table.second_derivative(0.0, 1)
    }

    pub fn piece_count(&self) -> usize {
        self.table.piece_count()
    }
}

enum Kernel {
    Model(SmallMomentumModel),
    Table(RateTable),
}

impl Kernel {
    fn at_zero(&self) -> Complex64 {
        match self {
            Kernel::Model(m) => Complex64::new(0.0, m.constant),
            Kernel::Table(t) => t.eval(0.0),
        }
    }

    /// `(g|g)₋(p) − (g|g)₋(0)`.
    fn shift(&self, p: f64, at_zero: Complex64) -> Complex64 {
        match self {
            Kernel::Model(m) => Complex64::new(0.0, -m.curvature * p * p),
            Kernel::Table(t) => t.eval(p) - at_zero,
        }
    }

    fn phase_slope(&self, p: f64) -> f64 {
        match self {
            Kernel::Model(m) => -2.0 * m.curvature * p,
            Kernel::Table(t) => t.table.derivative(p, 1),
        }
    }

    fn curvature(&self) -> f64 {
        match self {
            Kernel::Model(m) => m.curvature,
            Kernel::Table(t) => t.effective_curvature(),
        }
    }
}

fn check_smearing(f: &SmearingFunction) -> Result<()> {
    let v = f.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::invalid("smearing", v.join("; ")))
    }
}

fn prepare_kernel(
    model: &ModelConfig,
    f: &SmearingFunction,
    quad: &QuadratureSpec,
    kind: KernelKind,
) -> Result<(Kernel, f64)> {
    let p_max = f.radial_extent(quad.radial_cutoff_sigma);
    match kind {
        KernelKind::QuadraticModel => {
            let m = ggkernel::small_momentum_model(model, quad)?;
            let outside = f.mass_outside(2f64.sqrt());
            if outside > f64::EPSILON * f.total_mass() {
                log::warn!(
                    "smearing has mass {outside:.3e} (of {:.3e}) beyond |p| = √2 where the quadratic model is not derived",
                    f.total_mass()
                );
            }
            Ok((Kernel::Model(m), p_max))
        }
        KernelKind::Full => Ok((Kernel::Table(RateTable::build(model, p_max, quad)?), p_max)),
        KernelKind::ClosedForm => unreachable!("closed form has no quadrature kernel"),
    }
}

/// Breakpoints on `[0, p_max]` spaced by at most one local oscillation period.
fn oscillation_panels(kernel: &Kernel, t: f64, p_max: f64) -> Vec<f64> {
    let base = p_max / 64.0;
    let mut points = vec![0.0];
    let mut p = 0.0;
    while p < p_max {
        let mut h = base;
        if t > 0.0 {
            for _ in 0..2 {
                let slope = kernel
                    .phase_slope(p)
                    .abs()
                    .max(kernel.phase_slope((p + h).min(p_max)).abs());
                if slope > 0.0 {
                    h = h.min(2.0 * PI / (t * slope));
                }
            }
        }
        p = (p + h).min(p_max);
        if p_max - p < 1e-3 * h {
            p = p_max;
        }
        points.push(p);
    }
    points
}

fn amplitude_with(
    kernel: &Kernel,
    f: &SmearingFunction,
    t: f64,
    p_max: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(Complex64::new(f.total_mass(), 0.0));
    }
    let g0 = kernel.at_zero();
    let points = oscillation_panels(kernel, t, p_max);
    // Absolute tolerance is taken relative to the total mass.
    let integrator = Integrator::new(
        quad.rel_tol,
        quad.abs_tol * f.total_mass(),
        quad.max_subdivisions.max(points.len()),
    );
    let est = integrator
        .integrate(
            |p: f64| {
                let w = 4.0 * PI * p * p * f.eval_sq(p);
                if w == 0.0 {
                    return Complex64::default();
                }
                w * (-t * kernel.shift(p, g0)).exp()
            },
            &points,
        )
        .map_err(|e| Error::NonConvergence {
            context: "survival amplitude momentum quadrature",
            achieved: e.achieved,
            requested: e.requested,
        })?;
    Ok(est.value * (-t * g0).exp())
}

/// `X(t)` for one time. The full kernel is tabulated per call; batch work
/// should go through [`build_decay_curve`].
pub fn survival_amplitude(
    model: &ModelConfig,
    f: &SmearingFunction,
    t: f64,
    quad: &QuadratureSpec,
    kernel: KernelKind,
) -> Result<Complex64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(
            "t",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    check_smearing(f)?;
    if kernel == KernelKind::ClosedForm {
        return closed_form_amplitude(model, f, t, quad);
    }
    let (k, p_max) = prepare_kernel(model, f, quad, kernel)?;
    amplitude_with(&k, f, t, p_max, quad)
}

fn closed_form_amplitude(
    model: &ModelConfig,
    f: &SmearingFunction,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let m = ggkernel::small_momentum_model(model, quad)?;
    Ok(closed_form_value(&m, f, t))
}

fn closed_form_value(m: &SmallMomentumModel, f: &SmearingFunction, t: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -t * m.constant);
    f.normalization() * phase * gaussian_closed_form(m.curvature, f.width_parameter(), t)
}

pub fn build_decay_curve(
    model: &ModelConfig,
    f: &SmearingFunction,
    time_grid: &[f64],
    quad: &QuadratureSpec,
    kernel: KernelKind,
) -> Result<DecayCurve> {
    check_smearing(f)?;
    if time_grid.is_empty() {
        return Err(Error::invalid("time_grid", "must not be empty"));
    }
    if time_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("time_grid", "times must be finite and >= 0"));
    }
    if time_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time_grid", "must be strictly increasing"));
    }

    let (values, curvature) = if kernel == KernelKind::ClosedForm {
        let m = ggkernel::small_momentum_model(model, quad)?;
        let v = time_grid
            .iter()
            .map(|&t| closed_form_value(&m, f, t))
            .collect();
        (v, m.curvature)
    } else {
        let (k, p_max) = prepare_kernel(model, f, quad, kernel)?;
        let v = time_grid
            .par_iter()
            .map(|&t| amplitude_with(&k, f, t, p_max, quad))
            .collect::<Result<Vec<_>>>()?;
        (v, k.curvature())
    };

    Ok(DecayCurve {
        times: time_grid.to_vec(),
        values,
        kernel_kind: kernel,
        curvature: Some(curvature),
        width_parameter: Some(f.width_parameter()),
        mass: f.total_mass(),
    })
}

pub fn fit_tail_exponent(curve: &DecayCurve, window: WindowRule) -> Result<TailFit> {
    let (t_last, t_first) = match (curve.times.last(), curve.times.first()) {
        (Some(&l), Some(&f)) => (l, f),
        _ => {
            return Err(Error::InsufficientSamples {
                needed: MIN_TAIL_SAMPLES,
                found: 0,
            })
        }
    };
    let (lo, hi) = match window {
        WindowRule::Explicit { t_min, t_max } => {
            if !(t_min < t_max) {
                return Err(Error::invalid(
                    "fit_window",
                    format!("t_min {t_min} must be < t_max {t_max}"),
                ));
            }
            (t_min, t_max)
        }
        WindowRule::Auto => match (curve.curvature, curve.width_parameter) {
            (Some(a), Some(b)) if a != 0.0 && 10.0 * b / a.abs() < t_last => {
                (10.0 * b / a.abs(), t_last)
            }
            _ => ((t_last / 10.0).max(t_first), t_last),
        },
    };

    let mut ln_t = Vec::new();
    let mut t_lin = Vec::new();
    let mut ln_x = Vec::new();
    for (&t, v) in curve.times.iter().zip(&curve.values) {
        let m = v.norm();
        if t >= lo && t <= hi && t > 0.0 && m > 0.0 && m.is_finite() {
            ln_t.push(t.ln());
            t_lin.push(t);
            ln_x.push(m.ln());
        }
    }
    if ln_t.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_TAIL_SAMPLES,
            found: ln_t.len(),
        });
    }
    let power = fit_line(&ln_t, &ln_x).expect("distinct sample times");
    let exp = fit_line(&t_lin, &ln_x).expect("distinct sample times");

    let classification = if power.rms > 5.0 * exp.rms {
        TailClass::Exponential
    } else if power.rms < 0.05 && power.slope.is_finite() {
        TailClass::PowerLaw
    } else {
        TailClass::Undetermined
    };

    Ok(TailFit {
        exponent: power.slope,
        intercept: power.intercept,
        fit_window: (lo, hi),
        residual: power.rms,
        classification,
        exp_rate: -exp.slope,
        exp_residual: exp.rms,
        samples: ln_t.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RadialProfile, Vertex};

    #[test]
    fn closed_form_examples() {
        let v = gaussian_closed_form(2.0, PI, 0.0);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let v = gaussian_closed_form(1.0, 1.0, 1.0);
        let expected = PI.powf(1.5) / 2f64.powf(0.75);
        assert!((v.norm() - expected).abs() < 1e-14);
    }

    #[test]
    fn closed_form_is_continuous_in_time() {
        let mut prev = gaussian_closed_form(3.0, 2.0, 0.0);
        for i in 1..2000 {
            let z = gaussian_closed_form(3.0, 2.0, i as f64 * 0.05);
            assert!((z - prev).norm() < 0.2 * prev.norm());
            prev = z;
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-2, 1e4, 64);
        assert_eq!(g.len(), 64);
        assert!((g[0] - 1e-2).abs() < 1e-17);
        assert_eq!(g[63], 1e4);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_cutoff_curve_is_constant() {
        let m = ModelConfig::unit_dispersion(RadialProfile::Zero, Vertex::Dipole);
        let f = SmearingFunction::normalized_gaussian(25.0);
        let q = QuadratureSpec::default();
        let c = build_decay_curve(&m, &f, &[0.0, 1.0, 10.0, 100.0], &q, KernelKind::Full).unwrap();
        for v in &c.values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let m = ModelConfig::unit_dispersion(RadialProfile::Zero, Vertex::Dipole);
        let f = SmearingFunction::gaussian(5.0);
        let q = QuadratureSpec::default();
        assert!(build_decay_curve(&m, &f, &[1.0, 1.0], &q, KernelKind::QuadraticModel).is_err());
        assert!(build_decay_curve(&m, &f, &[], &q, KernelKind::QuadraticModel).is_err());
    }

    #[test]
    fn synthetic_power_law_and_exponential() {
        let times = log_grid(1.0, 1e3, 40);
        let curve = |vals: Vec<Complex64>| DecayCurve {
            times: times.clone(),
            values: vals,
            kernel_kind: KernelKind::ClosedForm,
            curvature: None,
            width_parameter: None,
            mass: 1.0,
        };
        let pl = curve(
            times
                .iter()
                .map(|t| Complex64::new(t.powf(-1.5), 0.0))
                .collect(),
        );
        let fit = fit_tail_exponent(
            &pl,
            WindowRule::Explicit {
                t_min: 1.0,
                t_max: 1e3,
            },
        )
        .unwrap();
        assert!((fit.exponent + 1.5).abs() < 1e-9);
        assert_eq!(fit.classification, TailClass::PowerLaw);

        let times = log_grid(1.0, 50.0, 30);
        let ex = DecayCurve {
            times: times.clone(),
            values: times
                .iter()
                .map(|t| Complex64::new((-t).exp(), 0.0))
                .collect(),
            ..pl
        };
        let fit = fit_tail_exponent(
            &ex,
            WindowRule::Explicit {
                t_min: 1.0,
                t_max: 50.0,
            },
        )
        .unwrap();
        assert_eq!(fit.classification, TailClass::Exponential);
        assert!((fit.exp_rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let times = vec![1.0, 2.0, 3.0];
        let c = DecayCurve {
            times: times.clone(),
            values: vec![Complex64::new(1.0, 0.0); 3],
            kernel_kind: KernelKind::Full,
            curvature: None,
            width_parameter: None,
            mass: 1.0,
        };
        assert!(matches!(
            fit_tail_exponent(&c, WindowRule::Auto),
            Err(Error::InsufficientSamples { needed: 8, .. })
        ));
    }
}
