// SPDX-License-Identifier: Apache-2.0

//! Vacuum correlators of the rescaled fields `a_λ(t,k)` at finite λ.
//!
//! The fields obey the module relations
//!
//! ```text
//! a(t,k) a†(t',k') = a†(t',k') a(t,k) q_λ(t−t', k·k') + λ⁻² q_λ(t−t', ω(k) − k·p + ½k²) δ(k−k')
//! a(t,k) a(t',k')  = a(t',k') a(t,k) q_λ⁻¹(t−t', k·k')
//! a(t,k) F(p)      = F(p − k) a(t,k)
//! ```
//!
//! on a discrete momentum table, where `δ(k−k')` becomes a Kronecker delta over
//! the cell volume. The evaluator moves the leftmost annihilator to the right,
//! contracting it with each creator of the same label in turn; every term is a
//! product of `q_λ` phases recorded symbolically as [`PhaseFactor`]s.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gaussian::log_gaussian_integral;
use crate::model::{dot, Dispersion};
use crate::qlimit::{q_lambda, ConvergenceReport, TestFunction};
use crate::{Error, Result};

pub const MAX_WORD_LENGTH: usize = 8;

/// Detunings below this are treated as lying on the resonance shell.
pub const SHELL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eps {
    Annihilator,
    Creator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSymbol {
    pub eps: Eps,
    pub time: f64,
    /// Index into the word's momentum table.
    pub label: usize,
}

impl OperatorSymbol {
    pub fn annihilator(time: f64, label: usize) -> Self {
        OperatorSymbol {
            eps: Eps::Annihilator,
            time,
            label,
        }
    }

    pub fn creator(time: f64, label: usize) -> Self {
        OperatorSymbol {
            eps: Eps::Creator,
            time,
            label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumEntry {
    pub k: [f64; 3],
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorWord {
    pub symbols: Vec<OperatorSymbol>,
    pub momentum_table: Vec<MomentumEntry>,
    /// Conditioning value `p̄` of the particle momentum.
    pub particle_momentum: [f64; 3],
}

impl OperatorWord {
    pub fn new(
        symbols: Vec<OperatorSymbol>,
        momentum_table: Vec<MomentumEntry>,
        particle_momentum: [f64; 3],
    ) -> Result<Self> {
        let w = OperatorWord {
            symbols,
            momentum_table,
            particle_momentum,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.symbols.len() > MAX_WORD_LENGTH {
            return Err(Error::UnsupportedWord(format!(
                "length {} exceeds {MAX_WORD_LENGTH}",
                self.symbols.len()
            )));
        }
        for (i, s) in self.symbols.iter().enumerate() {
            if s.label >= self.momentum_table.len() {
                return Err(Error::UnsupportedWord(format!(
                    "symbol {i} uses label {} but the table has {} entries",
                    s.label,
                    self.momentum_table.len()
                )));
            }
            if !s.time.is_finite() {
                return Err(Error::UnsupportedWord(format!(
                    "symbol {i} has a non-finite time"
                )));
            }
        }
        for (i, m) in self.momentum_table.iter().enumerate() {
            if !(m.volume.is_finite() && m.volume > 0.0) || m.k.iter().any(|c| !c.is_finite()) {
                return Err(Error::UnsupportedWord(format!(
                    "momentum entry {i} needs finite k and volume > 0"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_balanced(&self) -> bool {
        let creators = self
            .symbols
            .iter()
            .filter(|s| s.eps == Eps::Creator)
            .count();
        2 * creators == self.symbols.len()
    }

    fn k(&self, i: usize) -> [f64; 3] {
        self.momentum_table[self.symbols[i].label].k
    }

    fn volume(&self, i: usize) -> f64 {
        self.momentum_table[self.symbols[i].label].volume
    }

    /// `ω(k) − k·p̄ + ½k²` for a table entry.
    pub fn detuning(&self, label: usize, omega: &Dispersion) -> f64 {
        omega.detuning(self.momentum_table[label].k, self.particle_momentum)
    }
}

/// Parses `a(t,label)` and `a+(t,label)` tokens separated by whitespace.
pub fn parse_symbols(text: &str) -> Result<Vec<OperatorSymbol>> {
    let bad = |tok: &str| {
        Error::UnsupportedWord(format!(
            "cannot parse `{tok}`; expected a(t,label) or a+(t,label)"
        ))
    };
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let (eps, rest) = if let Some(r) = tok.strip_prefix("a+(") {
            (Eps::Creator, r)
        } else if let Some(r) = tok.strip_prefix("a(") {
            (Eps::Annihilator, r)
        } else {
            return Err(bad(tok));
        };
        let inner = rest.strip_suffix(')').ok_or_else(|| bad(tok))?;
        let (t, l) = inner.split_once(',').ok_or_else(|| bad(tok))?;
        let time: f64 = t.trim().parse().map_err(|_| bad(tok))?;
        let label: usize = l.trim().parse().map_err(|_| bad(tok))?;
        out.push(OperatorSymbol { eps, time, label });
    }
    Ok(out)
}

pub fn format_symbols(symbols: &[OperatorSymbol]) -> String {
    symbols
        .iter()
        .map(|s| match s.eps {
            Eps::Annihilator => format!("a({},{})", s.time, s.label),
            Eps::Creator => format!("a+({},{})", s.time, s.label),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `F(p − Σ±k)`: the value of `F` after it has been moved leftwards through
/// the operators of `prefix`. An annihilator with momentum `k` shifts the
/// argument by `−k`, a creator by `+k`.
pub fn shift_particle_function<F>(prefix: &[(Eps, [f64; 3])], f: F, p: [f64; 3]) -> Complex64
where
    F: Fn([f64; 3]) -> Complex64,
{
    let mut q = p;
    for (eps, k) in prefix {
        let sign = match eps {
            Eps::Annihilator => -1.0,
            Eps::Creator => 1.0,
        };
        for n in 0..3 {
            q[n] += sign * k[n];
        }
    }
    f(q)
}

/// `q_λ(t_lead − t_trail, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFactor {
    pub lead: usize,
    pub trail: usize,
    pub x: f64,
    /// Set on the contraction factor, whose `x` is the detuning of this label.
    pub contraction_label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingTerm {
    /// `(annihilator index, creator index)` in word order.
    pub pairing: Vec<(usize, usize)>,
    /// Product of all `q_λ` factors; unimodular.
    pub phase: Complex64,
    /// `Π 1/(λ² volume)` over the contractions.
    pub weight: f64,
    pub factors: Vec<PhaseFactor>,
}

impl PairingTerm {
    pub fn value(&self) -> Complex64 {
        self.phase * self.weight
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorValue {
    pub value: Complex64,
    /// False for words whose vacuum expectation vanishes by particle counting.
    pub balanced: bool,
    pub terms: Vec<PairingTerm>,
}

struct Skeleton {
    pairing: Vec<(usize, usize)>,
    factors: Vec<PhaseFactor>,
}

fn expand(
    word: &OperatorWord,
    omega: &Dispersion,
    rest: &[usize],
    acc: &mut Skeleton,
    out: &mut Vec<Skeleton>,
) {
    let Some(&first) = rest.first() else {
        out.push(Skeleton {
            pairing: acc.pairing.clone(),
            factors: acc.factors.clone(),
        });
        return;
    };
    if word.symbols[first].eps == Eps::Creator {
        // ⟨Ψ| a† = 0
        return;
    }
    let k = word.k(first);
    let label = word.symbols[first].label;
    for (jpos, &j) in rest.iter().enumerate().skip(1) {
        let sj = word.symbols[j];
        if sj.eps != Eps::Creator || sj.label != label {
            continue;
        }
        let mark = acc.factors.len();
        for &i in &rest[1..jpos] {
            let kk = dot(k, word.k(i));
            let x = match word.symbols[i].eps {
                Eps::Annihilator => -kk,
                Eps::Creator => kk,
            };
            acc.factors.push(PhaseFactor {
                lead: first,
                trail: i,
                x,
                contraction_label: None,
            });
        }
        acc.factors.push(PhaseFactor {
            lead: first,
            trail: j,
            x: omega.detuning(k, word.particle_momentum),
            contraction_label: Some(label),
        });
        // The contraction's p-function moved right past the remaining operators.
        for &i in &rest[jpos + 1..] {
            let kk = dot(k, word.k(i));
            let x = match word.symbols[i].eps {
                Eps::Annihilator => -kk,
                Eps::Creator => kk,
            };
            acc.factors.push(PhaseFactor {
                lead: first,
                trail: j,
                x,
                contraction_label: None,
            });
        }
        acc.pairing.push((first, j));
        let remaining: Vec<usize> = rest[1..].iter().copied().filter(|&i| i != j).collect();
        expand(word, omega, &remaining, acc, out);
        acc.pairing.pop();
        acc.factors.truncate(mark);
    }
}

fn skeletons(word: &OperatorWord, omega: &Dispersion) -> Vec<Skeleton> {
    let mut out = Vec::new();
    if !word.is_balanced() {
        return out;
    }
    let all: Vec<usize> = (0..word.len()).collect();
    let mut acc = Skeleton {
        pairing: Vec::new(),
        factors: Vec::new(),
    };
    expand(word, omega, &all, &mut acc, &mut out);
    out
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "lambda",
            format!("must be finite and > 0, got {lambda}"),
        ))
    }
}

pub fn pairing_terms(
    word: &OperatorWord,
    omega: &Dispersion,
    lambda: f64,
) -> Result<Vec<PairingTerm>> {
    word.validate()?;
    check_lambda(lambda)?;
    let l2 = lambda * lambda;
    Ok(skeletons(word, omega)
        .into_iter()
        .map(|s| {
            let phase = s.factors.iter().fold(Complex64::new(1.0, 0.0), |acc, f| {
                acc * q_lambda(
                    word.symbols[f.lead].time - word.symbols[f.trail].time,
                    f.x,
                    lambda,
                )
            });
            let weight = s
                .pairing
                .iter()
                .map(|&(a, _)| 1.0 / (l2 * word.volume(a)))
                .product();
            PairingTerm {
                pairing: s.pairing,
                phase,
                weight,
                factors: s.factors,
            }
        })
        .collect())
}

pub fn vacuum_correlator_finite_lambda(
    word: &OperatorWord,
    omega: &Dispersion,
    lambda: f64,
) -> Result<CorrelatorValue> {
    let terms = pairing_terms(word, omega, lambda)?;
    let value = terms.iter().map(PairingTerm::value).sum();
    Ok(CorrelatorValue {
        value,
        balanced: word.is_balanced(),
        terms,
    })
}

/// How the creator of a pair enters the Gaussian integral.
#[derive(Clone, Copy)]
enum CreatorVar {
    /// Its own time `t_c`.
    Time(usize),
    /// `s_c` with `t_c = t_a − λ² s_c`; the detuning is smeared by χ.
    Scaled(usize),
}

/// Time-smeared vacuum correlator at each λ.
///
/// Each symbol's time is integrated against its own Gaussian. Labels whose
/// detuning at `p̄` vanishes are probed with the detuning integrated against
/// `detuning_smearing`, mirroring the qlimit delta check; every other label is
/// evaluated at its actual detuning. All integrals are Gaussian and done in
/// closed form. The limit target is the term-wise `λ → 0` limit.
pub fn master_correlator_smeared(
    word: &OperatorWord,
    time_smearings: &[TestFunction],
    detuning_smearing: &TestFunction,
    omega: &Dispersion,
    lambdas: &[f64],
) -> Result<ConvergenceReport> {
    word.validate()?;
    if word.len() != 2 && word.len() != 4 {
        return Err(Error::UnsupportedWord(format!(
            "smeared correlators support words of length 2 or 4, got {}",
            word.len()
        )));
    }
    if time_smearings.len() != word.len() {
        return Err(Error::invalid(
            "time_smearings",
            format!(
                "need one per symbol ({}), got {}",
                word.len(),
                time_smearings.len()
            ),
        ));
    }
    for (i, s) in time_smearings.iter().enumerate() {
        if !s.violations("time_smearing").is_empty() {
            return Err(Error::invalid(
                "time_smearings",
                format!("entry {i} is invalid"),
            ));
        }
    }
    if !detuning_smearing.violations("detuning_smearing").is_empty() {
        return Err(Error::invalid("detuning_smearing", "width must be > 0"));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }

    let on_shell: Vec<bool> = (0..word.momentum_table.len())
        .map(|l| word.detuning(l, omega).abs() <= SHELL_TOLERANCE)
        .collect();
    let skel = skeletons(word, omega);
    for s in &skel {
        for (n, &(a, _)) in s.pairing.iter().enumerate() {
            let label = word.symbols[a].label;
            if on_shell[label]
                && s.pairing[n + 1..]
                    .iter()
                    .any(|&(b, _)| word.symbols[b].label == label)
            {
                return Err(Error::UnsupportedWord(format!(
                    "on-shell label {label} is contracted more than once; the limit is not a finite number"
                )));
            }
        }
    }

    let target: Complex64 = skel
        .iter()
        .map(|s| term_limit(word, s, &on_shell, time_smearings, detuning_smearing))
        .sum();
    let values = lambdas
        .iter()
        .map(|&l| {
            skel.iter()
                .map(|s| term_smeared(word, s, &on_shell, time_smearings, detuning_smearing, l))
                .sum::<Result<Complex64>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(lambdas.to_vec(), values, target))
}

/// Coefficient of `t_i` in `Σ x (t_lead − t_trail)` over the factors that are
/// not smeared contractions.
fn frequencies(word: &OperatorWord, s: &Skeleton, on_shell: &[bool]) -> Vec<f64> {
    let mut w = vec![0.0; word.len()];
    for f in &s.factors {
        if matches!(f.contraction_label, Some(l) if on_shell[l]) {
            continue;
        }
        w[f.lead] += f.x;
        w[f.trail] -= f.x;
    }
    w
}

fn term_limit(
    word: &OperatorWord,
    s: &Skeleton,
    on_shell: &[bool],
    phi: &[TestFunction],
    chi: &TestFunction,
) -> Complex64 {
    let w = frequencies(word, s, on_shell);
    let scale = w.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut value = 1.0;
    for &(a, c) in &s.pairing {
        if !on_shell[word.symbols[a].label] {
            return Complex64::default();
        }
        if (w[a] + w[c]).abs() > 1e-12 * scale {
            return Complex64::default();
        }
        value *=
            2.0 * std::f64::consts::PI * chi.eval(w[c]) * phi[a].overlap(&phi[c]) / word.volume(a);
    }
    Complex64::new(value, 0.0)
}

fn term_smeared(
    word: &OperatorWord,
    s: &Skeleton,
    on_shell: &[bool],
    phi: &[TestFunction],
    chi: &TestFunction,
    lambda: f64,
) -> Result<Complex64> {
    let n_sym = word.len();
    let l2 = lambda * lambda;

    // Variable layout: one per annihilator, then one per creator.
    let mut var_of = vec![usize::MAX; n_sym];
    let mut creator_var = Vec::new();
    let mut n = 0;
    for &(a, _) in &s.pairing {
        var_of[a] = n;
        n += 1;
    }
    for &(a, c) in &s.pairing {
        var_of[c] = n;
        creator_var.push(if on_shell[word.symbols[a].label] {
            CreatorVar::Scaled(n)
        } else {
            CreatorVar::Time(n)
        });
        n += 1;
    }
    // t_i = Σ_j lin[i][j] y_j
    let mut lin = vec![vec![0.0; n]; n_sym];
    for (&(a, c), cv) in s.pairing.iter().zip(&creator_var) {
        lin[a][var_of[a]] = 1.0;
        match *cv {
            CreatorVar::Time(v) => lin[c][v] = 1.0,
            CreatorVar::Scaled(v) => {
                lin[c][var_of[a]] = 1.0;
                lin[c][v] = -l2;
            }
        }
    }

    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut b = vec![Complex64::default(); n];
    let mut c0 = Complex64::default();

    for (i, f) in phi.iter().enumerate() {
        let (ctr, wid) = (f.center(), f.width());
        let inv = 1.0 / (wid * wid);
        for p in 0..n {
            for q in 0..n {
                m[(p, q)] += 2.0 * inv * lin[i][p] * lin[i][q];
            }
            b[p] += 2.0 * ctr * inv * lin[i][p];
        }
        c0 -= ctr * ctr * inv;
    }
    for f in &s.factors {
        if matches!(f.contraction_label, Some(l) if on_shell[l]) {
            continue;
        }
        for p in 0..n {
            b[p] += Complex64::new(0.0, -f.x / l2) * (lin[f.lead][p] - lin[f.trail][p]);
        }
    }
    let mut weight = 1.0;
    for (&(a, _), cv) in s.pairing.iter().zip(&creator_var) {
        match *cv {
            CreatorVar::Time(_) => weight /= l2 * word.volume(a),
            CreatorVar::Scaled(v) => {
                // ∫dx χ(x) e^{−isx} = w√π e^{−isc − s²w²/4}; the Jacobian λ² cancels λ⁻².
                let (cc, cw) = (chi.center(), chi.width());
                m[(v, v)] += 0.5 * cw * cw;
                b[v] += Complex64::new(0.0, -cc);
                c0 += (cw * std::f64::consts::PI.sqrt()).ln();
                weight /= word.volume(a);
            }
        }
    }
    let log = log_gaussian_integral(&m, &b, c0)?;
    Ok(weight * log.exp())
}
