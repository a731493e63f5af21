// SPDX-License-Identifier: Apache-2.0

//! Physical model: dispersion law, spherically symmetric cutoff `|g(k)|²`,
//! coupling vertex, particle smearing and quadrature settings.

use serde::{Deserialize, Serialize};

use statrs::function::erf::erfc;

use crate::quad::Integrator;
use crate::{Error, Result};

/// A nonnegative radial profile `r ↦ F(r)`, `r = |k| ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    /// `amplitude · exp(-((r - center) / width)²)`
    Gaussian {
        width: f64,
        amplitude: f64,
        #[serde(default)]
        center: f64,
    },
    /// Standard mollifier rescaled to `[inner, outer]` with peak `amplitude`
    /// at the midpoint; identically zero outside the open interval.
    CompactBump {
        inner: f64,
        outer: f64,
        amplitude: f64,
    },
    Zero,
}

impl RadialProfile {
    pub fn gaussian(width: f64, amplitude: f64) -> Self {
        RadialProfile::Gaussian {
            width,
            amplitude,
            center: 0.0,
        }
    }

    pub fn compact_bump(inner: f64, outer: f64, amplitude: f64) -> Self {
        RadialProfile::CompactBump {
            inner,
            outer,
            amplitude,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Gaussian {
                width,
                amplitude,
                center,
            } => {
                let u = (r - center) / width;
                amplitude * (-u * u).exp()
            }
            RadialProfile::CompactBump {
                inner,
                outer,
                amplitude,
            } => {
                if r <= inner || r >= outer {
                    return 0.0;
                }
                let s = (2.0 * r - inner - outer) / (outer - inner);
                let d = 1.0 - s * s;
                if d <= 0.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / d).exp()
                }
            }
            RadialProfile::Zero => 0.0,
        }
    }

    /// Radial interval outside which the profile is zero or negligible
    /// (Gaussians are cut at `sigma` widths). `None` for the zero profile.
    pub fn support(&self, sigma: f64) -> Option<(f64, f64)> {
        match *self {
            RadialProfile::Gaussian {
                width,
                amplitude,
                center,
            } => {
                if amplitude == 0.0 {
                    return None;
                }
                Some(((center - sigma * width).max(0.0), center + sigma * width))
            }
            RadialProfile::CompactBump {
                inner,
                outer,
                amplitude,
            } => (amplitude != 0.0).then_some((inner, outer)),
            RadialProfile::Zero => None,
        }
    }

    /// Interior points worth a quadrature breakpoint.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            RadialProfile::Gaussian { center, .. } if center > 0.0 => vec![center],
            RadialProfile::CompactBump { inner, outer, .. } => vec![0.5 * (inner + outer)],
            _ => Vec::new(),
        }
    }

    /// Profile multiplied by a nonnegative constant.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            RadialProfile::Gaussian {
                width,
                amplitude,
                center,
            } => RadialProfile::Gaussian {
                width,
                amplitude: amplitude * factor,
                center,
            },
            RadialProfile::CompactBump {
                inner,
                outer,
                amplitude,
            } => RadialProfile::CompactBump {
                inner,
                outer,
                amplitude: amplitude * factor,
            },
            RadialProfile::Zero => RadialProfile::Zero,
        }
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut v = Vec::new();
        match *self {
            RadialProfile::Gaussian {
                width,
                amplitude,
                center,
            } => {
                if !(width.is_finite() && width > 0.0) {
                    v.push(format!(
                        "{prefix}.width must be finite and > 0 (got {width})"
                    ));
                }
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    v.push(format!(
                        "{prefix}.amplitude must be finite and >= 0 (got {amplitude})"
                    ));
                }
                if !(center.is_finite() && center >= 0.0) {
                    v.push(format!(
                        "{prefix}.center must be finite and >= 0 (got {center})"
                    ));
                }
            }
            RadialProfile::CompactBump {
                inner,
                outer,
                amplitude,
            } => {
                if !(inner.is_finite() && inner >= 0.0) {
                    v.push(format!(
                        "{prefix}.inner must be finite and >= 0 (got {inner})"
                    ));
                }
                if !(outer.is_finite() && outer > inner) {
                    v.push(format!(
                        "{prefix}.outer must be finite and > inner (got {outer})"
                    ));
                }
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    v.push(format!(
                        "{prefix}.amplitude must be finite and >= 0 (got {amplitude})"
                    ));
                }
            }
            RadialProfile::Zero => {}
        }
        v
    }
}

/// Field dispersion law `ω(|k|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dispersion {
    Constant {
        omega0: f64,
    },
    /// `ω(r) = base + profile(r)`, with `base > 0` keeping ω strictly positive.
    Radial {
        base: f64,
        profile: RadialProfile,
    },
}

impl Dispersion {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Dispersion::Constant { omega0 } => omega0,
            Dispersion::Radial { base, profile } => base + profile.eval(r),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match *self {
            Dispersion::Constant { omega0 } => Some(omega0),
            Dispersion::Radial { .. } => None,
        }
    }

    /// `ω(k) − k·p + ½k²`, the resonance denominator of the rate kernel.
    pub fn detuning(&self, k: [f64; 3], p: [f64; 3]) -> f64 {
        let k2 = dot(k, k);
        self.eval(k2.sqrt()) - dot(k, p) + 0.5 * k2
    }

    pub fn violations(&self) -> Vec<String> {
        match *self {
            Dispersion::Constant { omega0 } => {
                if omega0.is_finite() && omega0 > 0.0 {
                    Vec::new()
                } else {
                    vec![format!(
                        "dispersion.omega0 must be finite and > 0 (got {omega0})"
                    )]
                }
            }
            Dispersion::Radial { base, profile } => {
                let mut v = profile.violations("dispersion.profile");
                if !(base.is_finite() && base > 0.0) {
                    v.push(format!(
                        "dispersion.base must be finite and > 0 (got {base})"
                    ));
                }
                v
            }
        }
    }
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Coupling vertex: `(2p+k)²` numerator for the dipole interaction, `1` for
/// the scalar polaron coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Vertex {
    #[default]
    Dipole,
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub dispersion: Dispersion,
    /// `|g(k)|²` as a function of `|k|`.
    pub cutoff_sq: RadialProfile,
    pub vertex: Vertex,
}

/// `ω ≡ 1`, dipole vertex, `|g(k)|² = exp(−k²)`.
impl Default for ModelConfig {
    fn default() -> Self {
        Self::unit_dispersion(RadialProfile::gaussian(1.0, 1.0), Vertex::Dipole)
    }
}

impl ModelConfig {
    pub fn new(dispersion: Dispersion, cutoff_sq: RadialProfile, vertex: Vertex) -> Self {
        ModelConfig {
            dispersion,
            cutoff_sq,
            vertex,
        }
    }

    /// `ω ≡ 1` with the given cutoff and vertex.
    pub fn unit_dispersion(cutoff_sq: RadialProfile, vertex: Vertex) -> Self {
        Self::new(Dispersion::Constant { omega0: 1.0 }, cutoff_sq, vertex)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = self.dispersion.violations();
        v.extend(self.cutoff_sq.violations("cutoff_sq"));
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("model", v.join("; ")))
        }
    }
}

/// `|g(k)|²` at `|k| = r`.
pub fn eval_cutoff_sq(model: &ModelConfig, r: f64) -> f64 {
    model.cutoff_sq.eval(r)
}

/// Radius of the resonant sphere `|k − p| = √(p² − 2ω₀)` for constant
/// dispersion, or `None` when the shell is empty.
pub fn resonance_shell_radius(model: &ModelConfig, p_mag: f64) -> Result<Option<f64>> {
    let omega0 = model.dispersion.constant_value().ok_or_else(|| {
        Error::UnsupportedDispersion("resonance shell radius needs a constant dispersion".into())
    })?;
    let mut disc = p_mag * p_mag - 2.0 * omega0;
    // p = √(2ω₀) rounded to a double lands a few ulps off the threshold.
    if disc.abs() <= 4.0 * f64::EPSILON * 2.0 * omega0 {
        disc = 0.0;
    }
    Ok((disc >= 0.0).then(|| disc.sqrt()))
}

/// Spherically symmetric particle profile; evaluates `|f(p)|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmearingFunction {
    /// `|f(p)|² = normalization · exp(-B p²)`
    Gaussian {
        b: f64,
        #[serde(default = "one")]
        normalization: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SmearingFunction {
    pub fn gaussian(b: f64) -> Self {
        SmearingFunction::Gaussian {
            b,
            normalization: 1.0,
        }
    }

    /// Gaussian rescaled to unit mass, `∫|f(p)|² dp = 1`.
    pub fn normalized_gaussian(b: f64) -> Self {
        SmearingFunction::Gaussian {
            b,
            normalization: (b / std::f64::consts::PI).powf(1.5),
        }
    }

    pub fn eval_sq(&self, p_mag: f64) -> f64 {
        match *self {
            SmearingFunction::Gaussian { b, normalization } => {
                normalization * (-b * p_mag * p_mag).exp()
            }
        }
    }

    pub fn width_parameter(&self) -> f64 {
        match *self {
            SmearingFunction::Gaussian { b, .. } => b,
        }
    }

    pub fn normalization(&self) -> f64 {
        match *self {
            SmearingFunction::Gaussian { normalization, .. } => normalization,
        }
    }

    /// `∫|f(p)|² d³p`.
    pub fn total_mass(&self) -> f64 {
        match *self {
            SmearingFunction::Gaussian { b, normalization } => {
                normalization * (std::f64::consts::PI / b).powf(1.5)
            }
        }
    }

    /// Mass of `|f|²` outside the ball `|p| < radius`.
    pub fn mass_outside(&self, radius: f64) -> f64 {
        match *self {
            SmearingFunction::Gaussian { b, normalization } => {
                // 4π∫_R^∞ p² e^{-Bp²} dp in closed form via erfc.
                let s = b.sqrt() * radius;
                let pi = std::f64::consts::PI;
                let tail = pi.sqrt() / 4.0 * erfc(s) + 0.5 * s * (-s * s).exp();
                normalization * 4.0 * pi * tail / b.powf(1.5)
            }
        }
    }

    /// Radius beyond which `|f|²` is below `e^{-sigma²}` of its peak.
    pub fn radial_extent(&self, sigma: f64) -> f64 {
        match *self {
            SmearingFunction::Gaussian { b, .. } => sigma / b.sqrt(),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        match *self {
            SmearingFunction::Gaussian { b, normalization } => {
                let mut v = Vec::new();
                if !(b.is_finite() && b > 0.0) {
                    v.push(format!("smearing.b must be finite and > 0 (got {b})"));
                }
                if !(normalization.is_finite() && normalization > 0.0) {
                    v.push(format!(
                        "smearing.normalization must be finite and > 0 (got {normalization})"
                    ));
                }
                v
            }
        }
    }
}

/// Numerical settings shared by every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation radius of Gaussian profiles, in widths.
    pub radial_cutoff_sigma: f64,
    /// Half-width of the excision used by brute-force principal-value checks.
    pub pv_excision: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            radial_cutoff_sigma: 8.0,
            pv_excision: 1e-3,
        }
    }
}

impl QuadratureSpec {
    pub fn integrator(&self) -> Integrator {
        Integrator::new(self.rel_tol, self.abs_tol, self.max_subdivisions)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let positive = [
            ("quadrature.rel_tol", self.rel_tol),
            ("quadrature.abs_tol", self.abs_tol),
            ("quadrature.radial_cutoff_sigma", self.radial_cutoff_sigma),
            ("quadrature.pv_excision", self.pv_excision),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                v.push(format!("{name} must be finite and > 0 (got {x})"));
            }
        }
        if self.max_subdivisions == 0 {
            v.push("quadrature.max_subdivisions must be > 0".to_string());
        }
        v
    }
}
