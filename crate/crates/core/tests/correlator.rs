// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use polaron_decay::correlator::{
    master_correlator_smeared, pairing_terms, parse_symbols, vacuum_correlator_finite_lambda, Eps,
    MomentumEntry, OperatorSymbol, OperatorWord,
};
use polaron_decay::model::Dispersion;
use polaron_decay::qlimit::{default_lambdas, q_lambda, smeared_delta_limit, TestFunction};
use polaron_decay::Error;
use polaron_oracles::{correlator_brute_force, tensor_trapezoid, Field};
use std::f64::consts::{PI, SQRT_2};

const UNIT: Dispersion = Dispersion::Constant { omega0: 1.0 };
const P_BAR: [f64; 3] = [0.2, 0.1, 0.0];
const TIMES: [f64; 4] = [0.3, -1.2, 2.1, 0.7];

fn off_shell_table() -> Vec<MomentumEntry> {
    vec![
        MomentumEntry {
            k: [0.3, 0.0, 0.0],
            volume: 0.5,
        },
        MomentumEntry {
            k: [0.0, 0.4, 0.1],
            volume: 0.8,
        },
    ]
}

fn on_shell_table() -> Vec<MomentumEntry> {
    vec![
        MomentumEntry {
            k: [2.0 + SQRT_2, 0.0, 0.0],
            volume: 0.5,
        },
        MomentumEntry {
            k: [2.0, SQRT_2, 0.0],
            volume: 0.8,
        },
    ]
}

/// On-shell at `p̄ = (2, 0, 0)` with `k₀·k₁ = 0`, so exchange phases drop out.
fn orthogonal_on_shell_table() -> Vec<MomentumEntry> {
    vec![
        MomentumEntry {
            k: [1.0, 1.0, 0.0],
            volume: 0.5,
        },
        MomentumEntry {
            k: [1.0, -1.0, 0.0],
            volume: 0.8,
        },
    ]
}

fn word(text: &str, table: Vec<MomentumEntry>, p: [f64; 3]) -> OperatorWord {
    OperatorWord::new(parse_symbols(text).unwrap(), table, p).unwrap()
}

fn fields(w: &OperatorWord) -> Vec<Field> {
    w.symbols
        .iter()
        .map(|s| {
            let e = w.momentum_table[s.label];
            Field {
                creator: s.eps == Eps::Creator,
                time: s.time,
                k: e.k,
                label: s.label,
                volume: e.volume,
            }
        })
        .collect()
}

/// Every word of the given length over two labels with equal creator and
/// annihilator counts.
fn balanced_words(len: usize) -> Vec<Vec<OperatorSymbol>> {
    let mut out = Vec::new();
    for code in 0..(1usize << (2 * len)) {
        let symbols: Vec<OperatorSymbol> = (0..len)
            .map(|i| {
                let bits = (code >> (2 * i)) & 3;
                let label = bits & 1;
                if bits & 2 == 0 {
                    OperatorSymbol::annihilator(TIMES[i], label)
                } else {
                    OperatorSymbol::creator(TIMES[i], label)
                }
            })
            .collect();
        let creators = symbols.iter().filter(|s| s.eps == Eps::Creator).count();
        if 2 * creators == len {
            out.push(symbols);
        }
    }
    out
}

#[test]
fn recurrence_matches_brute_force_normal_ordering() {
    let omega = |r: f64| UNIT.eval(r);
    let mut checked = 0;
    for len in [2, 4] {
        for symbols in balanced_words(len) {
            let w = OperatorWord::new(symbols, off_shell_table(), P_BAR).unwrap();
            for lambda in [1.0, 0.5, 0.25] {
                let v = vacuum_correlator_finite_lambda(&w, &UNIT, lambda)
                    .unwrap()
                    .value;
                let o = correlator_brute_force(&fields(&w), omega, P_BAR, lambda);
                assert!(
                    (v - o).norm() <= 1e-12 * o.norm().max(1.0),
                    "{:?} λ={lambda}: {v} vs {o}",
                    w.symbols
                );
                checked += 1;
            }
        }
    }
    // 8 + 96 balanced words, 3 λ each
    assert_eq!(checked, 3 * (8 + 96));
}

#[test]
fn recurrence_matches_brute_force_on_shell() {
    let omega = |r: f64| UNIT.eval(r);
    let p = [2.0, 0.0, 0.0];
    for symbols in balanced_words(4) {
        let w = OperatorWord::new(symbols, on_shell_table(), p).unwrap();
        let v = vacuum_correlator_finite_lambda(&w, &UNIT, 0.5)
            .unwrap()
            .value;
        let o = correlator_brute_force(&fields(&w), omega, p, 0.5);
        assert!((v - o).norm() <= 1e-12 * o.norm().max(1.0));
    }
}

#[test]
fn exchange_phases_are_unimodular() {
    for symbols in balanced_words(4) {
        let w = OperatorWord::new(symbols, off_shell_table(), P_BAR).unwrap();
        for t in pairing_terms(&w, &UNIT, 0.3).unwrap() {
            assert!((t.phase.norm() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn nested_word_is_a_product_of_contractions() {
    let w = word(
        "a(0.3,0) a(-1.2,1) a+(2.1,1) a+(0.7,0)",
        off_shell_table(),
        P_BAR,
    );
    let l = 0.5;
    let v = vacuum_correlator_finite_lambda(&w, &UNIT, l).unwrap();
    assert_eq!(v.terms.len(), 1);
    let k0 = w.momentum_table[0].k;
    let k1 = w.momentum_table[1].k;
    let d1 = w.detuning(1, &UNIT);
    // the outer contraction sees the particle momentum shifted by the inner pair
    let d0 = UNIT.detuning(k0, P_BAR);
    let cross = k0[0] * k1[0] + k0[1] * k1[1] + k0[2] * k1[2];
    let expected = q_lambda(-1.2 - 2.1, d1, l) / (l * l * 0.8) * q_lambda(0.3 - 0.7, d0, l)
        / (l * l * 0.5)
        * q_lambda(0.3 - (-1.2), -cross, l)
        * q_lambda(0.3 - 2.1, cross, l);
    assert!(
        (v.value - expected).norm() < 1e-12 * expected.norm(),
        "{} vs {expected}",
        v.value
    );
}

#[test]
fn unbalanced_and_annihilator_words_vanish() {
    let w = word("a(0,0) a(1,1)", off_shell_table(), P_BAR);
    for l in [1.0, 0.1] {
        let v = vacuum_correlator_finite_lambda(&w, &UNIT, l).unwrap();
        assert!(!v.balanced && v.value == Complex64::default());
    }
    let g = TestFunction::gaussian(0.0, 1.0);
    let r = master_correlator_smeared(&w, &[g, g], &g, &UNIT, &default_lambdas()).unwrap();
    assert!(r.values.iter().all(|v| *v == Complex64::default()));
    assert_eq!(r.limit_target, Complex64::default());
}

#[test]
fn off_shell_pair_vanishes_in_the_limit() {
    // ω = 1, k = 0, p̄ = 0: detuning 1
    let table = vec![MomentumEntry {
        k: [0.0; 3],
        volume: 1.0,
    }];
    let w = word("a(0,0) a+(0,0)", table, [0.0; 3]);
    let g = TestFunction::gaussian(0.0, 1.0);
    let r = master_correlator_smeared(&w, &[g, g], &g, &UNIT, &default_lambdas()).unwrap();
    assert_eq!(r.limit_target, Complex64::default());
    let m: Vec<f64> = r.values.iter().map(|v| v.norm()).collect();
    // the values underflow to exactly zero once the phase is fast enough
    assert!(
        m[1..]
            .windows(2)
            .all(|w| w[1] < w[0] || w[0] == 0.0 && w[1] == 0.0),
        "{m:?}"
    );
    assert!(m[5] < 1e-6 * m[0]);
}

#[test]
fn smeared_off_shell_values_match_tensor_quadrature() {
    let l = 0.5;
    let phis = [
        TestFunction::gaussian(0.0, 1.0),
        TestFunction::gaussian(0.4, 0.8),
        TestFunction::gaussian(-0.3, 1.1),
        TestFunction::gaussian(0.2, 0.9),
    ];
    let chi = TestFunction::gaussian(0.0, 1.0);
    for text in [
        "a(0,0) a+(0,0)",
        "a(0,0) a(0,1) a+(0,1) a+(0,0)",
        "a(0,0) a+(0,0) a(0,1) a+(0,1)",
    ] {
        let w = word(text, off_shell_table(), P_BAR);
        let n = w.len();
        let r = master_correlator_smeared(&w, &phis[..n], &chi, &UNIT, &[l]).unwrap();
        let terms = pairing_terms(&w, &UNIT, l).unwrap();
        let integrand = |t: &[f64]| -> Complex64 {
            let mut total = Complex64::default();
            for term in &terms {
                let mut v = Complex64::new(term.weight, 0.0);
                for f in &term.factors {
                    v *= q_lambda(t[f.lead] - t[f.trail], f.x, l);
                }
                total += v;
            }
            let smear: f64 = (0..n).map(|i| phis[i].eval(t[i])).product();
            total * smear
        };
        let pts = if n == 2 { 400 } else { 48 };
        let ranges: Vec<(f64, f64, usize)> = (0..n).map(|_| (-6.5, 6.5, pts)).collect();
        let o = tensor_trapezoid(integrand, &ranges);
        assert!(
            (r.values[0] - o).norm() < 1e-8 * o.norm(),
            "{text}: {} vs {o}",
            r.values[0]
        );
    }
}

#[test]
fn on_shell_pair_mirrors_the_delta_limit() {
    let p = [2.0, 0.0, 0.0];
    let w = word("a(0,1) a+(0,1)", on_shell_table(), p);
    assert!(w.detuning(0, &UNIT).abs() < 1e-12 && w.detuning(1, &UNIT).abs() < 1e-12);
    let phi = TestFunction::gaussian(0.0, 1.0);
    let psi = TestFunction::gaussian(0.5, 1.0);
    let chi = TestFunction::gaussian(0.3, 1.0);
    let lambdas = default_lambdas();
    let r = master_correlator_smeared(&w, &[phi, psi], &chi, &UNIT, &lambdas).unwrap();
    let d = smeared_delta_limit(&phi, &psi, &chi, &lambdas).unwrap();
    let vol = 0.8;
    assert!((r.limit_target * vol - d.limit_target).norm() < 1e-14 * d.limit_target.norm());
    assert!(
        (r.limit_target.re - 2.0 * PI * chi.eval(0.0) * phi.overlap(&psi) / vol).abs()
            < 1e-14 * r.limit_target.re
    );
    for (v, o) in r.values.iter().zip(&d.values) {
        assert!((v * vol - o).norm() < 1e-9 * o.norm(), "{v} vs {o}");
    }
}

#[test]
fn on_shell_nested_word_converges_to_product() {
    let p = [2.0, 0.0, 0.0];
    let w = word(
        "a(0,0) a(0,1) a+(0,1) a+(0,0)",
        orthogonal_on_shell_table(),
        p,
    );
    assert!(w.detuning(0, &UNIT).abs() < 1e-15 && w.detuning(1, &UNIT).abs() < 1e-15);
    let g = TestFunction::gaussian(0.0, 1.0);
    let phis = [g, g, g, g];
    let r = master_correlator_smeared(&w, &phis, &g, &UNIT, &default_lambdas()).unwrap();
    let pair = 2.0 * PI * g.overlap(&g);
    let expected = pair / 0.5 * pair / 0.8;
    assert!((r.limit_target.re - expected).abs() < 1e-13 * expected);
    let e = r.errors();
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    assert!(e[5] < 1e-2 * expected);

    // with k₀·k₁ ≠ 0 the inner pair sees χ at the exchange frequency
    let w = word("a(0,0) a(0,1) a+(0,1) a+(0,0)", on_shell_table(), p);
    let r = master_correlator_smeared(&w, &phis, &g, &UNIT, &[0.5]).unwrap();
    let k0 = w.momentum_table[0].k;
    let k1 = w.momentum_table[1].k;
    let dot = k0[0] * k1[0] + k0[1] * k1[1] + k0[2] * k1[2];
    let expected = pair / 0.5 * 2.0 * PI * g.eval(-dot) * g.overlap(&g) / 0.8;
    assert!((r.limit_target.re - expected).abs() < 1e-13 * expected);
}

#[test]
fn crossing_word_is_nonzero_at_finite_lambda_and_vanishes_in_the_limit() {
    let w = word(
        "a(0.3,0) a(-1.2,1) a+(2.1,0) a+(0.7,1)",
        off_shell_table(),
        P_BAR,
    );
    let v = vacuum_correlator_finite_lambda(&w, &UNIT, 0.5).unwrap();
    let o = correlator_brute_force(&fields(&w), |r| UNIT.eval(r), P_BAR, 0.5);
    assert!(v.value.norm() > 1e-3 && (v.value - o).norm() < 1e-12 * o.norm());

    let p = [2.0, 0.0, 0.0];
    let w = word("a(0,0) a(0,1) a+(0,0) a+(0,1)", on_shell_table(), p);
    let g = TestFunction::gaussian(0.0, 1.0);
    let r = master_correlator_smeared(&w, &[g, g, g, g], &g, &UNIT, &default_lambdas()).unwrap();
    assert_eq!(r.limit_target, Complex64::default());
    assert!(
        r.values[5].norm() < 1e-3 * r.values[0].norm(),
        "{:?}",
        r.values
    );
}

#[test]
fn unsupported_words_are_rejected() {
    let g = TestFunction::gaussian(0.0, 1.0);
    let w = word(
        "a(0,0) a+(0,0) a(0,0) a+(1,0) a(0,1) a+(0,1)",
        off_shell_table(),
        P_BAR,
    );
    assert!(matches!(
        master_correlator_smeared(&w, &[g; 6], &g, &UNIT, &[0.5]),
        Err(Error::UnsupportedWord(_))
    ));
    // an on-shell label contracted twice has no finite limit
    let w = word(
        "a(0,0) a+(0,0) a(1,0) a+(1,0)",
        on_shell_table(),
        [2.0, 0.0, 0.0],
    );
    assert!(matches!(
        master_correlator_smeared(&w, &[g; 4], &g, &UNIT, &[0.5]),
        Err(Error::UnsupportedWord(_))
    ));
    let long = "a(0,0) ".repeat(9);
    let symbols = parse_symbols(&long).unwrap();
    assert!(OperatorWord::new(symbols, off_shell_table(), P_BAR).is_err());
}
