// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::Command;

use polaron_cli::{emit_config, parse_config, run, Cell, Format};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polaron-decay"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn column(table: &polaron_cli::Table, name: &str) -> Vec<f64> {
    let i = table.columns.iter().position(|c| *c == name).unwrap();
    table
        .rows
        .iter()
        .map(|r| match r[i] {
            Cell::Float(x) => x,
            _ => panic!("{name} is not numeric"),
        })
        .collect()
}

fn meta(table: &polaron_cli::Table, key: &str) -> Cell {
    table.meta.iter().find(|(k, _)| k == key).unwrap().1.clone()
}

#[test]
fn zero_cutoff_curve_is_constant() {
    let c = parse_config(
        r#"
[run]
mode = "curve"
time_grid = { kind = "log", t_min = 0.01, t_max = 1000.0, points = 12 }
[model]
cutoff_sq = { kind = "zero" }
[smearing]
kind = "gaussian"
b = 4.0
"#,
    )
    .unwrap();
    let t = run(&c).unwrap();
    let abs = column(&t, "abs");
    assert_eq!(abs.len(), 12);
    assert!(abs.iter().all(|x| *x == abs[0]));
}

#[test]
fn quadratic_sweep_exponents() {
    let c = parse_config(
        r#"
[run]
mode = "sweep"
kernel = "quadratic_model"
sweep = { parameter = "smearing.b", values = [5.0, 25.0, 100.0] }
"#,
    )
    .unwrap();
    let t = run(&c).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert_eq!(column(&t, "value"), vec![5.0, 25.0, 100.0]);
    for e in column(&t, "exponent") {
        assert!((e + 1.5).abs() < 0.05, "{e}");
    }
}

#[test]
fn qcheck_order_is_in_band() {
    let c = parse_config("[run]\nmode = \"qcheck\"\n").unwrap();
    let t = run(&c).unwrap();
    let Cell::Float(order) = meta(&t, "delta.fitted_order") else {
        panic!()
    };
    assert!((1.5..=2.5).contains(&order), "{order}");
    let checks: Vec<&Cell> = t.rows.iter().map(|r| &r[0]).collect();
    assert_eq!(
        checks
            .iter()
            .filter(|c| ***c == Cell::Text("delta".into()))
            .count(),
        6
    );
}

#[test]
fn corrcheck_off_shell_pair_vanishes() {
    let c = parse_config(
        r#"
[run]
mode = "corrcheck"
[corrcheck]
word = "a(0,0) a+(0,0)"
momenta = [{ k = [0.0, 0.0, 0.0], volume = 1.0 }]
"#,
    )
    .unwrap();
    let t = run(&c).unwrap();
    let err = column(&t, "error");
    assert!(err[5] < 1e-6 * err[0]);
    assert_eq!(column(&t, "target_re"), vec![0.0; 6]);
}

#[test]
fn rate_mode_below_threshold_is_undamped() {
    let c = parse_config(
        "[run]\nmode = \"rate\"\nrate_grid = { p_min = 0.0, p_max = 1.4, points = 8 }\n",
    )
    .unwrap();
    let t = run(&c).unwrap();
    assert!(column(&t, "re").iter().all(|x| *x == 0.0));
    assert!(column(&t, "im").iter().all(|x| *x < 0.0));
}

#[test]
fn emitted_config_hashes_identically() {
    let c = parse_config("[run]\nmode = \"rate\"\n").unwrap();
    let again = parse_config(&emit_config(&c)).unwrap();
    assert_eq!(
        polaron_cli::config_hash(&c),
        polaron_cli::config_hash(&again)
    );
}

#[test]
fn exit_code_for_bad_config_is_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.toml",
        "[run]\nmode = \"curve\"\n[smearing]\nkind = \"gaussian\"\nb = -1.0\n",
    );
    let out = binary().arg("--config").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("smearing.b"));

    let p = write(
        dir.path(),
        "typo.toml",
        "[run]\nmode = \"rate\"\n[quadrature]\nrel_tol = 1e-8\nrel_toll = 1.0\n",
    );
    let out = binary().arg("--config").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("rel_toll") && msg.contains("line 5"), "{msg}");
}

#[test]
fn exit_code_for_nonconvergence_is_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "tight.toml",
        "[run]\nmode = \"rate\"\n[quadrature]\nrel_tol = 1e-16\nabs_tol = 1e-300\nmax_subdivisions = 1\n",
    );
    let out = binary().arg("--config").arg(&p).output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("ggkernel"));
}

#[test]
fn exit_code_for_io_errors_is_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = binary()
        .arg("--config")
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    let p = write(dir.path(), "rate.toml", "[run]\nmode = \"rate\"\n");
    let out = binary()
        .arg("--config")
        .arg(&p)
        .arg("--output")
        .arg(dir.path().join("no/such/dir/out.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn flags_override_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "c.toml",
        "[run]\nmode = \"rate\"\nformat = \"csv\"\n",
    );
    let out_path = dir.path().join("out.json");
    let status = binary()
        .arg("--config")
        .arg(&p)
        .args([
            "--mode",
            "qcheck",
            "--format",
            "json",
            "--threads",
            "2",
            "--output",
        ])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(v["meta"]["mode"], "qcheck");
    assert_eq!(v["rows"].as_array().unwrap().len(), 12);
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "c.toml",
        r#"
[run]
mode = "sweep"
kernel = "quadratic_model"
sweep = { parameter = "smearing.b", values = [5.0, 25.0] }
"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3", "1"] {
        let out = binary()
            .arg("--config")
            .arg(&p)
            .args(["--threads", threads])
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(out.stdout);
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(outputs.pop().unwrap()).unwrap();
    assert!(text.starts_with("# tool: polaron-decay\n"));
    assert!(text.lines().any(|l| l.starts_with("value,curvature,")));
}

#[test]
fn json_and_csv_carry_the_same_values() {
    let c = parse_config(
        "[run]\nmode = \"rate\"\nrate_grid = { p_min = 0.5, p_max = 2.0, points = 4 }\n",
    )
    .unwrap();
    let t = run(&c).unwrap();
    let mut csv = Vec::new();
    t.write(Format::Csv, &mut csv).unwrap();
    let mut json = Vec::new();
    t.write(Format::Json, &mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let data: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    for (i, line) in data.iter().enumerate() {
        let im: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(im, v["rows"][i]["im"].as_f64().unwrap());
    }
}
