// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a TOML document with `run`, `model`, `smearing`,
//! `quadrature` and the optional `qcheck` / `corrcheck` sections.

use std::path::PathBuf;

use polaron_decay::correlator::{parse_symbols, MomentumEntry, OperatorWord};
use polaron_decay::decay::{KernelKind, WindowRule};
use polaron_decay::model::{
    Dispersion, ModelConfig, QuadratureSpec, RadialProfile, SmearingFunction,
};
use polaron_decay::qlimit::{default_lambdas, TestFunction};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Rate,
    Curve,
    Sweep,
    Qcheck,
    Corrcheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Rate => "rate",
            Mode::Curve => "curve",
            Mode::Sweep => "sweep",
            Mode::Qcheck => "qcheck",
            Mode::Corrcheck => "corrcheck",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Momentum grid for rate mode, linearly spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateGrid {
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
}

impl Default for RateGrid {
    fn default() -> Self {
        RateGrid {
            p_min: 0.0,
            p_max: 2.0,
            points: 21,
        }
    }
}

impl RateGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.p_min];
        }
        (0..self.points)
            .map(|i| self.p_min + (self.p_max - self.p_min) * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeGrid {
    /// 64 log-spaced points over `[10⁻², 10⁴]·B/A`; needs `ω ≡ 1`.
    #[default]
    Default,
    Log {
        t_min: f64,
        t_max: f64,
        points: usize,
    },
    List {
        times: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "smearing.b")]
    SmearingB,
    #[serde(rename = "model.dispersion.omega0")]
    Omega0,
    #[serde(rename = "model.cutoff_sq.width")]
    CutoffWidth,
    #[serde(rename = "model.cutoff_sq.amplitude")]
    CutoffAmplitude,
    #[serde(rename = "model.cutoff_sq.inner")]
    CutoffInner,
    #[serde(rename = "model.cutoff_sq.outer")]
    CutoffOuter,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::SmearingB => "smearing.b",
            SweepParameter::Omega0 => "model.dispersion.omega0",
            SweepParameter::CutoffWidth => "model.cutoff_sq.width",
            SweepParameter::CutoffAmplitude => "model.cutoff_sq.amplitude",
            SweepParameter::CutoffInner => "model.cutoff_sq.inner",
            SweepParameter::CutoffOuter => "model.cutoff_sq.outer",
        }
    }

    /// Copies of `model` and `smearing` with the parameter set to `value`.
    pub fn apply(
        self,
        model: &ModelConfig,
        smearing: &SmearingFunction,
        value: f64,
    ) -> Result<(ModelConfig, SmearingFunction), String> {
        let mut m = *model;
        let mut f = *smearing;
        let mismatch = || {
            format!(
                "sweep parameter {} does not apply to the configured model",
                self.name()
            )
        };
        match self {
            SweepParameter::SmearingB => {
                let SmearingFunction::Gaussian { b, .. } = &mut f;
                *b = value;
            }
            SweepParameter::Omega0 => match &mut m.dispersion {
                Dispersion::Constant { omega0 } => *omega0 = value,
                Dispersion::Radial { .. } => return Err(mismatch()),
            },
            SweepParameter::CutoffWidth => match &mut m.cutoff_sq {
                RadialProfile::Gaussian { width, .. } => *width = value,
                _ => return Err(mismatch()),
            },
            SweepParameter::CutoffAmplitude => match &mut m.cutoff_sq {
                RadialProfile::Gaussian { amplitude, .. }
                | RadialProfile::CompactBump { amplitude, .. } => *amplitude = value,
                RadialProfile::Zero => return Err(mismatch()),
            },
            SweepParameter::CutoffInner => match &mut m.cutoff_sq {
                RadialProfile::CompactBump { inner, .. } => *inner = value,
                _ => return Err(mismatch()),
            },
            SweepParameter::CutoffOuter => match &mut m.cutoff_sq {
                RadialProfile::CompactBump { outer, .. } => *outer = value,
                _ => return Err(mismatch()),
            },
        }
        Ok((m, f))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn default_window() -> WindowRule {
    WindowRule::Auto
}

fn is_auto(w: &WindowRule) -> bool {
    *w == WindowRule::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    #[serde(default = "default_kernel")]
    pub kernel: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub rate_grid: RateGrid,
    #[serde(default)]
    pub time_grid: TimeGrid,
    #[serde(default = "default_window", skip_serializing_if = "is_auto")]
    pub tail_window: WindowRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
}

fn default_kernel() -> KernelKind {
    KernelKind::Full
}

fn default_smearing() -> SmearingFunction {
    SmearingFunction::gaussian(25.0)
}

fn unit_gaussian() -> TestFunction {
    TestFunction::gaussian(0.0, 1.0)
}

fn offset_psi() -> TestFunction {
    TestFunction::gaussian(0.5, 1.0)
}

fn offset_chi() -> TestFunction {
    TestFunction::gaussian(0.3, 1.0)
}

fn one() -> f64 {
    1.0
}

/// Distributional-limit check: `∫φ q_λ(·,x)` and the smeared delta triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QCheck {
    #[serde(default = "one")]
    pub x: f64,
    #[serde(default = "unit_gaussian")]
    pub phi: TestFunction,
    #[serde(default = "offset_psi")]
    pub psi: TestFunction,
    #[serde(default = "offset_chi")]
    pub chi: TestFunction,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
}

impl Default for QCheck {
    fn default() -> Self {
        QCheck {
            x: 1.0,
            phi: unit_gaussian(),
            psi: offset_psi(),
            chi: offset_chi(),
            lambdas: default_lambdas(),
        }
    }
}

/// Smeared vacuum correlator of one word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrCheck {
    /// Symbols `a(t,label)` / `a+(t,label)` separated by spaces.
    pub word: String,
    pub momenta: Vec<MomentumEntry>,
    #[serde(default)]
    pub particle_momentum: [f64; 3],
    /// One per symbol; defaults to unit Gaussians at the symbol times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_smearings: Option<Vec<TestFunction>>,
    #[serde(default = "unit_gaussian")]
    pub detuning_smearing: TestFunction,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
}

impl CorrCheck {
    pub fn operator_word(&self) -> Result<OperatorWord, String> {
        let symbols = parse_symbols(&self.word).map_err(|e| format!("corrcheck.word: {e}"))?;
        OperatorWord::new(symbols, self.momenta.clone(), self.particle_momentum)
            .map_err(|e| format!("corrcheck: {e}"))
    }

    pub fn smearings(&self, word: &OperatorWord) -> Vec<TestFunction> {
        match &self.time_smearings {
            Some(s) => s.clone(),
            None => word
                .symbols
                .iter()
                .map(|s| TestFunction::gaussian(s.time, 1.0))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default = "default_smearing")]
    pub smearing: SmearingFunction,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qcheck: Option<QCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrcheck: Option<CorrCheck>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// Canonical TOML text of a configuration.
pub fn emit_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("configuration serializes")
}

fn check_lambdas(prefix: &str, lambdas: &[f64], v: &mut Vec<String>) {
    if lambdas.is_empty() {
        v.push(format!("{prefix}.lambdas must not be empty"));
    }
    for (i, l) in lambdas.iter().enumerate() {
        if !(l.is_finite() && *l > 0.0) {
            v.push(format!(
                "{prefix}.lambdas[{i}] must be finite and > 0 (got {l})"
            ));
        }
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        v.push(format!("{prefix}.lambdas must be strictly decreasing"));
    }
}

impl RunConfig {
    /// Every violated invariant, with the offending key.
    pub fn violations(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .model
            .violations()
            .into_iter()
            .map(|s| format!("model.{s}"))
            .collect();
        v.extend(self.smearing.violations());
        v.extend(self.quadrature.violations());

        let run = &self.run;
        if matches!(run.mode, Mode::Rate) {
            let g = run.rate_grid;
            if g.points == 0 {
                v.push("run.rate_grid.points must be > 0".into());
            }
            if !(g.p_min.is_finite() && g.p_min >= 0.0) {
                v.push(format!(
                    "run.rate_grid.p_min must be finite and >= 0 (got {})",
                    g.p_min
                ));
            }
            if !(g.p_max.is_finite() && g.p_max >= g.p_min) {
                v.push(format!(
                    "run.rate_grid.p_max must be finite and >= p_min (got {})",
                    g.p_max
                ));
            }
        }
        if matches!(run.mode, Mode::Curve | Mode::Sweep) {
            match &run.time_grid {
                TimeGrid::Default => {
                    if self.model.dispersion.constant_value() != Some(1.0) {
                        v.push("run.time_grid: the default grid needs model.dispersion with omega0 = 1".into());
                    }
                }
                TimeGrid::Log {
                    t_min,
                    t_max,
                    points,
                } => {
                    if !(t_min.is_finite() && *t_min > 0.0) {
                        v.push(format!(
                            "run.time_grid.t_min must be finite and > 0 (got {t_min})"
                        ));
                    }
                    if !(t_max.is_finite() && t_max > t_min) {
                        v.push(format!(
                            "run.time_grid.t_max must be finite and > t_min (got {t_max})"
                        ));
                    }
                    if *points < 2 {
                        v.push(format!("run.time_grid.points must be >= 2 (got {points})"));
                    }
                }
                TimeGrid::List { times } => {
                    if times.is_empty() {
                        v.push("run.time_grid.times must not be empty".into());
                    }
                    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                        v.push("run.time_grid.times must be finite and >= 0".into());
                    }
                    if times.windows(2).any(|w| w[1] <= w[0]) {
                        v.push("run.time_grid.times must be strictly increasing".into());
                    }
                }
            }
            if let WindowRule::Explicit { t_min, t_max } = run.tail_window {
                if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
                    v.push(format!(
                        "run.tail_window needs 0 < t_min < t_max (got {t_min}, {t_max})"
                    ));
                }
            }
        }
        if run.kernel == KernelKind::ClosedForm && matches!(run.mode, Mode::Curve | Mode::Sweep) {
            if self.model.dispersion.constant_value() != Some(1.0) {
                v.push("run.kernel = closed_form needs model.dispersion with omega0 = 1".into());
            }
        }
        match (&run.sweep, run.mode) {
            (None, Mode::Sweep) => v.push("run.sweep is required in sweep mode".into()),
            (Some(axis), _) => {
                if axis.values.is_empty() {
                    v.push("run.sweep.values must not be empty".into());
                }
                for (i, x) in axis.values.iter().enumerate() {
                    match axis.parameter.apply(&self.model, &self.smearing, *x) {
                        Err(e) => {
                            v.push(format!("run.sweep: {e}"));
                            break;
                        }
                        Ok((m, f)) => {
                            let mut bad: Vec<String> = m
                                .violations()
                                .into_iter()
                                .map(|s| format!("model.{s}"))
                                .collect();
                            bad.extend(f.violations());
                            for b in bad {
                                v.push(format!("run.sweep.values[{i}]: {b}"));
                            }
                        }
                    }
                }
            }
            (None, _) => {}
        }

        if run.mode == Mode::Qcheck {
            let q = self.qcheck.clone().unwrap_or_default();
            if !(q.x.is_finite() && q.x != 0.0) {
                v.push(format!("qcheck.x must be finite and nonzero (got {})", q.x));
            }
            v.extend(q.phi.violations("qcheck.phi"));
            v.extend(q.psi.violations("qcheck.psi"));
            v.extend(q.chi.violations("qcheck.chi"));
            check_lambdas("qcheck", &q.lambdas, &mut v);
        }
        if run.mode == Mode::Corrcheck {
            match &self.corrcheck {
                None => v.push("corrcheck section is required in corrcheck mode".into()),
                Some(c) => {
                    for (i, e) in c.momenta.iter().enumerate() {
                        if !(e.volume.is_finite() && e.volume > 0.0) {
                            v.push(format!(
                                "corrcheck.momenta[{i}].volume must be finite and > 0 (got {})",
                                e.volume
                            ));
                        }
                        if e.k.iter().any(|x| !x.is_finite()) {
                            v.push(format!("corrcheck.momenta[{i}].k must be finite"));
                        }
                    }
                    match c.operator_word() {
                        Err(e) => v.push(e),
                        Ok(w) => {
                            if !matches!(w.len(), 2 | 4) {
                                v.push(format!(
                                    "corrcheck.word must have length 2 or 4 (got {})",
                                    w.len()
                                ));
                            }
                            if let Some(s) = &c.time_smearings {
                                if s.len() != w.len() {
                                    v.push(format!(
                                        "corrcheck.time_smearings needs one entry per symbol ({}), got {}",
                                        w.len(),
                                        s.len()
                                    ));
                                }
                                for (i, f) in s.iter().enumerate() {
                                    v.extend(
                                        f.violations(&format!("corrcheck.time_smearings[{i}]")),
                                    );
                                }
                            }
                        }
                    }
                    v.extend(
                        c.detuning_smearing
                            .violations("corrcheck.detuning_smearing"),
                    );
                    check_lambdas("corrcheck", &c.lambdas, &mut v);
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "config: {} invalid setting(s):\n  {}",
                v.len(),
                v.join("\n  ")
            )))
        }
    }
}
