// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use polaron_decay::correlator::{master_correlator_smeared, vacuum_correlator_finite_lambda};
use polaron_decay::decay::{
    build_decay_curve, default_time_grid, fit_tail_exponent, log_grid, DecayCurve, KernelKind,
    TailFit,
};
use polaron_decay::ggkernel::{a_coefficient, gg_minus, small_momentum_model};
use polaron_decay::model::{ModelConfig, QuadratureSpec, SmearingFunction};
use polaron_decay::qlimit::{smeared_delta_limit, smeared_q_limit, ConvergenceReport};
use polaron_decay::Error;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{emit_config, Mode, RunConfig, TimeGrid};
use crate::output::{Cell, Table};
use crate::CliError;

/// Hex SHA-256 of the canonical configuration text, output destination excluded.
pub fn config_hash(config: &RunConfig) -> String {
    let mut c = config.clone();
    c.run.output = None;
    hex::encode(Sha256::digest(emit_config(&c).as_bytes()))
}

fn kernel_name(k: KernelKind) -> &'static str {
    match k {
        KernelKind::Full => "full",
        KernelKind::QuadraticModel => "quadratic_model",
        KernelKind::ClosedForm => "closed_form",
    }
}

/// Evaluates the configured mode into a table.
pub fn run(config: &RunConfig) -> Result<Table, CliError> {
    config.validate()?;
    let mut table = match config.run.mode {
        Mode::Rate => rate(config)?,
        Mode::Curve => curve(config)?,
        Mode::Sweep => sweep(config)?,
        Mode::Qcheck => qcheck(config)?,
        Mode::Corrcheck => corrcheck(config)?,
    };
    let mut meta = vec![
        ("tool".to_string(), Cell::from("polaron-decay")),
        ("version".to_string(), Cell::from(env!("CARGO_PKG_VERSION"))),
        ("mode".to_string(), Cell::from(config.run.mode.name())),
        ("config_sha256".to_string(), Cell::Text(config_hash(config))),
    ];
    meta.append(&mut table.meta);
    table.meta = meta;
    Ok(table)
}

fn rate(config: &RunConfig) -> Result<Table, CliError> {
    let (model, quad) = (&config.model, &config.quadrature);
    let kernel = config.run.kernel;
    let small = match kernel {
        KernelKind::Full => None,
        _ => Some(small_momentum_model(model, quad).map_err(CliError::from_core("ggkernel"))?),
    };
    let ps = config.run.rate_grid.values();
    let rates = ps
        .par_iter()
        .map(|&p| match &small {
            None => gg_minus(model, p, quad),
            Some(s) => Ok(s.rate_radial(p)),
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(CliError::from_core("ggkernel"))?;
    let mut t = Table::new(&["p", "re", "im"]);
    t.meta("kernel", kernel_name(kernel));
    for (p, r) in ps.iter().zip(rates) {
        t.push(vec![(*p).into(), r.re.into(), r.im.into()]);
    }
    Ok(t)
}

fn time_grid(
    grid: &TimeGrid,
    model: &ModelConfig,
    f: &SmearingFunction,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>, CliError> {
    match grid {
        TimeGrid::Default => {
            let a = a_coefficient(model, quad).map_err(CliError::from_core("ggkernel"))?;
            default_time_grid(a, f.width_parameter()).map_err(CliError::from_core("decay"))
        }
        TimeGrid::Log {
            t_min,
            t_max,
            points,
        } => Ok(log_grid(*t_min, *t_max, *points)),
        TimeGrid::List { times } => Ok(times.clone()),
    }
}

/// Curve and tail fit; a window with too few samples leaves the fit empty.
fn curve_and_fit(
    config: &RunConfig,
    model: &ModelConfig,
    f: &SmearingFunction,
) -> Result<(DecayCurve, Result<TailFit, String>), CliError> {
    let quad = &config.quadrature;
    let grid = time_grid(&config.run.time_grid, model, f, quad)?;
    let curve = build_decay_curve(model, f, &grid, quad, config.run.kernel)
        .map_err(CliError::from_core("decay"))?;
    let fit = match fit_tail_exponent(&curve, config.run.tail_window) {
        Ok(fit) => Ok(fit),
        Err(e @ Error::InsufficientSamples { .. }) => Err(e.to_string()),
        Err(e) => return Err(CliError::from_core("decay")(e)),
    };
    Ok((curve, fit))
}

fn curve(config: &RunConfig) -> Result<Table, CliError> {
    let (c, fit) = curve_and_fit(config, &config.model, &config.smearing)?;
    let mut t = Table::new(&["t", "re", "im", "abs"]);
    t.meta("kernel", kernel_name(c.kernel_kind));
    t.meta("mass", c.mass);
    if let Some(a) = c.curvature {
        t.meta("curvature", a);
    }
    if let Some(b) = c.width_parameter {
        t.meta("width_parameter", b);
    }
    match fit {
        Ok(fit) => {
            t.meta("tail.exponent", fit.exponent);
            t.meta("tail.intercept", fit.intercept);
            t.meta("tail.t_min", fit.fit_window.0);
            t.meta("tail.t_max", fit.fit_window.1);
            t.meta("tail.residual", fit.residual);
            t.meta("tail.classification", classification(&fit));
            t.meta("tail.exp_rate", fit.exp_rate);
            t.meta("tail.samples", fit.samples);
        }
        Err(reason) => t.meta("tail", Cell::Text(format!("unavailable ({reason})"))),
    }
    for (time, v) in c.times.iter().zip(&c.values) {
        t.push(vec![
            (*time).into(),
            v.re.into(),
            v.im.into(),
            v.norm().into(),
        ]);
    }
    Ok(t)
}

fn classification(fit: &TailFit) -> &'static str {
    use polaron_decay::decay::TailClass;
    match fit.classification {
        TailClass::PowerLaw => "power_law",
        TailClass::Exponential => "exponential",
        TailClass::Undetermined => "undetermined",
    }
}

fn sweep(config: &RunConfig) -> Result<Table, CliError> {
    let axis = config.run.sweep.as_ref().expect("validated");
    let points = axis
        .values
        .par_iter()
        .map(|&x| {
            let (m, f) = axis
                .parameter
                .apply(&config.model, &config.smearing, x)
                .map_err(CliError::Config)?;
            curve_and_fit(config, &m, &f)
        })
        .collect::<Vec<_>>();
    let mut t = Table::new(&[
        "value",
        "curvature",
        "width_parameter",
        "exponent",
        "intercept",
        "residual",
        "classification",
        "exp_rate",
        "t_min",
        "t_max",
        "samples",
    ]);
    t.meta("kernel", kernel_name(config.run.kernel));
    t.meta("parameter", axis.parameter.name());
    for (x, point) in axis.values.iter().zip(points) {
        let (c, fit) = point?;
        let nan = f64::NAN;
        let row: Vec<Cell> = match fit {
            Ok(fit) => vec![
                (*x).into(),
                c.curvature.unwrap_or(nan).into(),
                c.width_parameter.unwrap_or(nan).into(),
                fit.exponent.into(),
                fit.intercept.into(),
                fit.residual.into(),
                classification(&fit).into(),
                fit.exp_rate.into(),
                fit.fit_window.0.into(),
                fit.fit_window.1.into(),
                fit.samples.into(),
            ],
            Err(_) => vec![
                (*x).into(),
                c.curvature.unwrap_or(nan).into(),
                c.width_parameter.unwrap_or(nan).into(),
                nan.into(),
                nan.into(),
                nan.into(),
                "undetermined".into(),
                nan.into(),
                nan.into(),
                nan.into(),
                0usize.into(),
            ],
        };
        t.push(row);
    }
    Ok(t)
}

const REPORT_COLUMNS: [&str; 8] = [
    "check",
    "lambda",
    "re",
    "im",
    "error",
    "target_re",
    "target_im",
    "fitted_order",
];

/// One row per λ; `extra[i]` is appended to row `i` when present.
fn push_report(t: &mut Table, name: &str, r: &ConvergenceReport, extra: &[Vec<Cell>]) {
    for (i, ((l, v), e)) in r.lambdas.iter().zip(&r.values).zip(r.errors()).enumerate() {
        let mut row = vec![
            name.into(),
            (*l).into(),
            v.re.into(),
            v.im.into(),
            e.into(),
            r.limit_target.re.into(),
            r.limit_target.im.into(),
            r.fitted_order.into(),
        ];
        row.extend(extra.get(i).cloned().unwrap_or_default());
        t.push(row);
    }
}

fn qcheck(config: &RunConfig) -> Result<Table, CliError> {
    let q = config.qcheck.clone().unwrap_or_default();
    let (qr, dr) = rayon::join(
        || smeared_q_limit(&q.phi, q.x, &q.lambdas),
        || smeared_delta_limit(&q.phi, &q.psi, &q.chi, &q.lambdas),
    );
    let qr = qr.map_err(CliError::from_core("qlimit"))?;
    let dr = dr.map_err(CliError::from_core("qlimit"))?;
    let mut t = Table::new(&REPORT_COLUMNS);
    t.meta("q.fitted_order", qr.fitted_order);
    t.meta("delta.fitted_order", dr.fitted_order);
    push_report(&mut t, "q", &qr, &[]);
    push_report(&mut t, "delta", &dr, &[]);
    Ok(t)
}

fn corrcheck(config: &RunConfig) -> Result<Table, CliError> {
    let c = config.corrcheck.as_ref().expect("validated");
    let word = c.operator_word().map_err(CliError::Config)?;
    let omega = &config.model.dispersion;
    let smear = c.smearings(&word);
    let report = master_correlator_smeared(&word, &smear, &c.detuning_smearing, omega, &c.lambdas)
        .map_err(CliError::from_core("correlator"))?;
    let bare = c
        .lambdas
        .iter()
        .map(|&l| vacuum_correlator_finite_lambda(&word, omega, l).map(|v| v.value))
        .collect::<Result<Vec<Complex64>, Error>>()
        .map_err(CliError::from_core("correlator"))?;
    let mut columns = REPORT_COLUMNS.to_vec();
    columns.extend(["bare_re", "bare_im"]);
    let mut t = Table::new(&columns);
    t.meta("word", Cell::Text(c.word.clone()));
    t.meta(
        "balanced",
        if word.is_balanced() { "true" } else { "false" },
    );
    t.meta("fitted_order", report.fitted_order);
    let extra: Vec<Vec<Cell>> = bare
        .iter()
        .map(|b| vec![b.re.into(), b.im.into()])
        .collect();
    push_report(&mut t, "smeared", &report, &extra);
    Ok(t)
}
