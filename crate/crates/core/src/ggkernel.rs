// SPDX-License-Identifier: Apache-2.0

//! The complex rate kernel
//!
//! ```text
//! (g|g)₋(p) = ∫dk |g(k)|² N(k,p) [πδ(D) − i P.V. 1/D],   D = ω(k) − k·p + ½k²
//! ```
//!
//! with `N = (2p+k)²` (dipole) or `N = 1` (scalar). In spherical coordinates
//! about `p` the denominator is linear in `μ = cos θ`, `D = a − bμ` with
//! `a = ω(r) + ½r²` and `b = r|p|`, and the numerator is `c0 + c1 μ`. The
//! angular integral is done in closed form by [`angular_reduce`]; only a
//! one-dimensional radial integral is left to quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{ModelConfig, QuadratureSpec, Vertex};
use crate::{Error, Result};

/// Value of `(g|g)₋(p)`. `re` is the damping rate, `im` the phase rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexRate {
    pub re: f64,
    pub im: f64,
}

impl ComplexRate {
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `∫₋₁¹ (c0 + c1μ)/(a − bμ) dμ` split into principal value and δ weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularResult {
    pub pv_part: f64,
    /// `π (c0 + c1μ*)/|b|` when the pole `μ* = a/b` lies strictly inside.
    pub delta_part: f64,
    /// `|a| = |b|`: the pole sits on an endpoint and the principal value is
    /// logarithmically divergent unless the numerator vanishes there.
    pub tangent: bool,
}

/// `atanh(x)/x − 1` without cancellation for small `x`. `atanh` is the
/// caller's value of `atanh(x)`, used once `|x| ≥ 0.1`.
fn atanh_ratio_minus_one(x: f64, atanh: impl FnOnce() -> f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..40 {
            term *= x2;
            let t = term / (2 * n + 1) as f64;
            sum += t;
            if t < 1e-18 * sum {
                break;
            }
        }
        sum
    } else {
        atanh() / x - 1.0
    }
}

pub fn angular_reduce(a: f64, b: f64, c0: f64, c1: f64) -> Result<AngularResult> {
    angular_reduce_split(a, b, a - b, c0, c1)
}

/// As [`angular_reduce`] with `a − b` supplied by the caller, who can often
/// form it without cancellation near tangency.
pub(crate) fn angular_reduce_split(
    a: f64,
    b: f64,
    a_minus_b: f64,
    c0: f64,
    c1: f64,
) -> Result<AngularResult> {
    let a_plus_b = a + b;
    if b == 0.0 {
        if a == 0.0 {
            return Err(Error::SingularInput(
                "angular reduction with a = b = 0 has a non-integrable pole".into(),
            ));
        }
        return Ok(AngularResult {
            pv_part: 2.0 * c0 / a,
            delta_part: 0.0,
            tangent: false,
        });
    }

    if a_minus_b * a_plus_b > 0.0 {
        // Pole outside [-1, 1]: ordinary integral.
        let x = b / a;
        let h = atanh_ratio_minus_one(x, || 0.5 * (a_plus_b / a_minus_b).ln());
        let h_over_x = if x.abs() < 0.1 {
            // h is even in x; divide term by term.
            let x2 = x * x;
            let mut term = x;
            let mut sum = 0.0;
            for n in 1..40 {
                let t = term / (2 * n + 1) as f64;
                sum += t;
                if t.abs() < 1e-18 * sum.abs() {
                    break;
                }
                term *= x2;
            }
            sum
        } else {
            h / x
        };
        let pv = 2.0 * c0 / a * (1.0 + h) + 2.0 * c1 / a * h_over_x;
        return Ok(AngularResult {
            pv_part: pv,
            delta_part: 0.0,
            tangent: false,
        });
    }

    let mu_star = a / b;
    let numerator_at_pole = c0 + c1 * mu_star;
    if a_minus_b == 0.0 || a_plus_b == 0.0 {
        let pv = if numerator_at_pole == 0.0 {
            -2.0 * c1 / b
        } else {
            let log = if a_minus_b == 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            numerator_at_pole * log / b
        };
        return Ok(AngularResult {
            pv_part: pv,
            delta_part: 0.0,
            tangent: true,
        });
    }

    let log = (a_plus_b / a_minus_b).abs().ln();
    Ok(AngularResult {
        pv_part: numerator_at_pole * log / b - 2.0 * c1 / b,
        delta_part: PI * numerator_at_pole.max(0.0) / b.abs(),
        tangent: false,
    })
}

/// Radii where the resonance shell is tangent to the sphere `|k| = r`,
/// i.e. `ω(r) + ½r² = r|p|`, inside `(lo, hi)`.
pub fn tangency_radii(model: &ModelConfig, p_mag: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if p_mag <= 0.0 {
        return roots;
    }
    if let Some(omega0) = model.dispersion.constant_value() {
        let disc = p_mag * p_mag - 2.0 * omega0;
        if disc >= 0.0 {
            let s = disc.sqrt();
            roots.extend([p_mag - s, p_mag + s]);
        }
    } else {
        let g = |r: f64| model.dispersion.eval(r) + 0.5 * r * r - r * p_mag;
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let mut x0 = lo;
        let mut g0 = g(x0);
        for i in 1..=n {
            let x1 = lo + h * i as f64;
            let g1 = g(x1);
            if g0 == 0.0 {
                roots.push(x0);
            } else if g0 * g1 < 0.0 {
                let (mut l, mut u) = (x0, x1);
                let gl = g0;
                for _ in 0..200 {
                    let m = 0.5 * (l + u);
                    if m <= l || m >= u {
                        break;
                    }
                    if g(m) * gl > 0.0 {
                        l = m;
                    } else {
                        u = m;
                    }
                }
                roots.push(0.5 * (l + u));
            }
            x0 = x1;
            g0 = g1;
        }
    }
    roots.retain(|&r| r > lo && r < hi);
    roots.dedup();
    roots
}

/// Radii where `ω(r) + ½r² - r|p|` has a positive local minimum. Just below
/// threshold the shell nearly touches the sphere there and the log term peaks.
fn near_tangency_radii(model: &ModelConfig, p_mag: f64, lo: f64, hi: f64) -> Vec<f64> {
    if p_mag <= 0.0 {
        return Vec::new();
    }
    let g = |r: f64| model.dispersion.eval(r) + 0.5 * r * r - r * p_mag;
    let mut out = Vec::new();
    if model.dispersion.constant_value().is_some() {
        out.push(p_mag);
    } else {
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let mut prev = g(lo);
        let mut cur = g(lo + h);
        for i in 2..=n {
            let next = g(lo + h * i as f64);
            if cur > 0.0 && cur < prev && cur <= next {
                out.push(lo + h * (i - 1) as f64);
            }
            prev = cur;
            cur = next;
        }
    }
    out.retain(|&r| r > lo && r < hi);
    out
}

/// Coefficients `(c0, c1)` of the numerator `c0 + c1μ`.
fn numerator(vertex: Vertex, r: f64, p_mag: f64) -> (f64, f64) {
    match vertex {
        Vertex::Dipole => (4.0 * p_mag * p_mag + r * r, 4.0 * r * p_mag),
        Vertex::Scalar => (1.0, 0.0),
    }
}

/// `(g|g)₋(p)` for `|p| = p_mag`.
pub fn gg_minus(model: &ModelConfig, p_mag: f64, quad: &QuadratureSpec) -> Result<ComplexRate> {
    let Some((lo, hi)) = model.cutoff_sq.support(quad.radial_cutoff_sigma) else {
        return Ok(ComplexRate::default());
    };
    let mut points = vec![lo];
    points.extend(
        model
            .cutoff_sq
            .breakpoints()
            .into_iter()
            .filter(|&x| x > lo && x < hi),
    );
    points.extend(tangency_radii(model, p_mag, lo, hi));
    points.extend(near_tangency_radii(model, p_mag, lo, hi));
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let integrand = |r: f64| -> Complex64 {
        let weight = 2.0 * PI * r * r * model.cutoff_sq.eval(r);
        if weight == 0.0 {
            return Complex64::default();
        }
        let w = model.dispersion.eval(r);
        let a = w + 0.5 * r * r;
        let b = r * p_mag;
        let a_minus_b = (w - 0.5 * p_mag * p_mag) + 0.5 * (r - p_mag) * (r - p_mag);
        let (c0, c1) = numerator(model.vertex, r, p_mag);
        match angular_reduce_split(a, b, a_minus_b, c0, c1) {
            Ok(ang) if !ang.tangent => {
                Complex64::new(weight * ang.delta_part, -weight * ang.pv_part)
            }
            // Tangency radii are breakpoints, so the rule never samples them.
            _ => Complex64::default(),
        }
    };

    let est = quad
        .integrator()
        .integrate(integrand, &points)
        .map_err(|e| Error::NonConvergence {
            context: "rate kernel radial quadrature",
            achieved: e.achieved,
            requested: e.requested,
        })?;
    Ok(ComplexRate {
        re: est.value.re,
        im: est.value.im,
    })
}

fn require_unit_dispersion(model: &ModelConfig) -> Result<()> {
    match model.dispersion.constant_value() {
        Some(w) if w == 1.0 => Ok(()),
        _ => Err(Error::UnsupportedDispersion(
            "the small-momentum expansion assumes ω(k) = 1".into(),
        )),
    }
}

/// `4π ∫ r² |g(r)|² h(r) dr` over the cutoff support.
fn radial_moment(
    model: &ModelConfig,
    quad: &QuadratureSpec,
    h: impl Fn(f64) -> f64,
) -> Result<f64> {
    let Some((lo, hi)) = model.cutoff_sq.support(quad.radial_cutoff_sigma) else {
        return Ok(0.0);
    };
    let mut points = vec![lo];
    points.extend(
        model
            .cutoff_sq
            .breakpoints()
            .into_iter()
            .filter(|&x| x > lo && x < hi),
    );
    points.push(hi);
    quad.integrator()
        .integrate(
            |r: f64| 4.0 * PI * r * r * model.cutoff_sq.eval(r) * h(r),
            &points,
        )
        .map(|e| e.value)
        .map_err(|e| Error::NonConvergence {
            context: "cutoff moment quadrature",
            achieved: e.achieved,
            requested: e.requested,
        })
}

fn resolvent(r: f64) -> f64 {
    1.0 / (1.0 + 0.5 * r * r)
}

/// Quadratic model `(g|g)₋(p) ≈ −i (constant − curvature·p² − Q·p)` valid for
/// `|p| < √2` under a slowly varying cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallMomentumModel {
    /// `im (g|g)₋` at `p = 0`.
    pub constant: f64,
    /// The coefficient `A`.
    pub curvature: f64,
    pub q: [f64; 3],
}

impl SmallMomentumModel {
    pub fn rate(&self, p: [f64; 3]) -> ComplexRate {
        let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        let pq = p[0] * self.q[0] + p[1] * self.q[1] + p[2] * self.q[2];
        ComplexRate {
            re: 0.0,
            im: self.constant - self.curvature * p2 - pq,
        }
    }

    pub fn rate_radial(&self, p_mag: f64) -> ComplexRate {
        self.rate([0.0, 0.0, p_mag])
    }
}

/// Coefficient `A` of the `p²` term.
///
/// For the dipole vertex this is `10∫|g|²/(1+½k²) − ∫|g|²/(1+½k²)²`. For the
/// scalar vertex the same shifted-cutoff expansion gives `½∫|g|²/(1+½k²)²`.
pub fn a_coefficient(model: &ModelConfig, quad: &QuadratureSpec) -> Result<f64> {
    require_unit_dispersion(model)?;
    match model.vertex {
        Vertex::Dipole => radial_moment(model, quad, |r| {
            let w = resolvent(r);
            10.0 * w - w * w
        }),
        Vertex::Scalar => radial_moment(model, quad, |r| {
            let w = resolvent(r);
            0.5 * w * w
        }),
    }
}

/// Vector `Q = 6∫|g(k)|² k/(1+½k²) dk`. The integrand is odd under `k → −k`
/// for every spherically symmetric cutoff, so `Q` vanishes identically.
pub fn q_coefficient(_model: &ModelConfig, _quad: &QuadratureSpec) -> [f64; 3] {
    [0.0; 3]
}

pub fn small_momentum_model(
    model: &ModelConfig,
    quad: &QuadratureSpec,
) -> Result<SmallMomentumModel> {
    require_unit_dispersion(model)?;
    let constant = match model.vertex {
        Vertex::Dipole => radial_moment(model, quad, |r| -2.0 + 2.0 * resolvent(r))?,
        Vertex::Scalar => radial_moment(model, quad, |r| -resolvent(r))?,
    };
    Ok(SmallMomentumModel {
        constant,
        curvature: a_coefficient(model, quad)?,
        q: q_coefficient(model, quad),
    })
}

pub fn gg_minus_smallp(
    model: &ModelConfig,
    p_vec: [f64; 3],
    quad: &QuadratureSpec,
) -> Result<ComplexRate> {
    let p2 = p_vec[0] * p_vec[0] + p_vec[1] * p_vec[1] + p_vec[2] * p_vec[2];
    if !(p2 < 2.0) {
        return Err(Error::Domain(format!(
            "small-momentum model needs |p| < √2, got |p| = {}",
            p2.sqrt()
        )));
    }
    Ok(small_momentum_model(model, quad)?.rate(p_vec))
}
