// SPDX-License-Identifier: Apache-2.0

//! Slow reference computations for the test suites.
//!
//! Nothing here shares code with the library: integrals use fixed grids,
//! principal values use symmetric excision, and correlators are normal-ordered
//! by literal application of the exchange rules.

use num_complex::Complex64;
use rand::Rng;

/// Composite Simpson rule with `n` (rounded up to even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// `∫ h(μ) dμ` over `[lo, hi]`, all on one side of `pole`, with `h` of the
/// form `num(μ)/(μ − pole)`, integrated in `u = ln|μ − pole|`.
fn log_panel<F: Fn(f64) -> f64>(num_over: F, pole: f64, lo: f64, hi: f64, n: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > pole {
        let (u0, u1) = ((lo - pole).ln(), (hi - pole).ln());
        // dμ/(μ−pole) = du
        simpson(|u| num_over(pole + u.exp()), u0, u1, n)
    } else {
        let (u0, u1) = ((pole - hi).ln(), (pole - lo).ln());
        // μ = pole − e^u, dμ/(μ − pole) = du, and u decreases as μ increases
        -simpson(|u| num_over(pole - u.exp()), u0, u1, n)
    }
}

/// `P.V.∫₋₁¹ (c0 + c1μ)/(a − bμ) dμ` by symmetric excision of `[μ*−ε, μ*+ε]`,
/// extrapolated to `ε → 0` with two Richardson steps (orders 1 and 2).
pub fn pv_excision(a: f64, b: f64, c0: f64, c1: f64, eps: f64) -> f64 {
    const N: usize = 20_000;
    if b == 0.0 {
        return simpson(|mu| (c0 + c1 * mu) / a, -1.0, 1.0, 2);
    }
    let pole = a / b;
    // (c0 + c1μ)/(a − bμ) = −(c0 + c1μ)/(b (μ − pole))
    let num = |mu: f64| -(c0 + c1 * mu) / b;
    if pole.abs() > 1.0 {
        return log_panel(num, pole, -1.0, 1.0, N);
    }
    let excised =
        |e: f64| log_panel(num, pole, -1.0, pole - e, N) + log_panel(num, pole, pole + e, 1.0, N);
    let e = eps.min(0.5 * (1.0 - pole.abs())).max(1e-12);
    let (v1, v2, v3) = (excised(e), excised(e / 2.0), excised(e / 4.0));
    let r1 = 2.0 * v2 - v1;
    let r2 = 2.0 * v3 - v2;
    (4.0 * r2 - r1) / 3.0
}

/// `(g|g)₋(p)` by two-dimensional quadrature in `(r, μ)`: the angular principal
/// value by excision, the δ weight at the pole, the radial integral by Simpson.
/// Intended for momenta with an empty resonance shell or a shell well inside
/// the support.
pub fn gg_minus_2d<G, W>(
    g_sq: G,
    omega: W,
    dipole: bool,
    p: f64,
    r_max: f64,
    n_r: usize,
) -> Complex64
where
    G: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let inner = |r: f64, part: usize| -> f64 {
        let w = g_sq(r);
        if w == 0.0 {
            return 0.0;
        }
        let a = omega(r) + 0.5 * r * r;
        let b = r * p;
        let (c0, c1) = if dipole {
            (4.0 * p * p + r * r, 4.0 * r * p)
        } else {
            (1.0, 0.0)
        };
        let pi = std::f64::consts::PI;
        let v = if part == 0 {
            if b != 0.0 && (a / b).abs() < 1.0 {
                pi * (c0 + c1 * a / b).max(0.0) / b.abs()
            } else {
                0.0
            }
        } else {
            pv_excision(a, b, c0, c1, 1e-3)
        };
        2.0 * pi * r * r * w * v
    };
    let re = simpson(|r| inner(r, 0), 0.0, r_max, n_r);
    let im = -simpson(|r| inner(r, 1), 0.0, r_max, n_r);
    Complex64::new(re, im)
}

/// `6∫|g(|k|)|² k/(1+½k²) d³k` by antithetic Monte Carlo over the cube
/// `[−L, L]³`: every sample is paired with its mirror image.
pub fn q_vector_monte_carlo<G, R>(g_sq: G, half_side: f64, pairs: usize, rng: &mut R) -> [f64; 3]
where
    G: Fn(f64) -> f64,
    R: Rng,
{
    let mut acc = [0.0; 3];
    let vol = (2.0 * half_side).powi(3);
    for _ in 0..pairs {
        let k: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-half_side..half_side));
        for sign in [1.0, -1.0] {
            let kk = k.map(|c| sign * c);
            let r2 = kk[0] * kk[0] + kk[1] * kk[1] + kk[2] * kk[2];
            let w = 6.0 * g_sq(r2.sqrt()) / (1.0 + 0.5 * r2);
            for n in 0..3 {
                acc[n] += w * kk[n];
            }
        }
    }
    acc.map(|s| s * vol / (2 * pairs) as f64)
}

/// Same integral on a midpoint product grid with `n` cells per axis.
pub fn q_vector_grid<G: Fn(f64) -> f64>(g_sq: G, half_side: f64, n: usize) -> [f64; 3] {
    let h = 2.0 * half_side / n as f64;
    let mut acc = [0.0; 3];
    for i in 0..n {
        let x = -half_side + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = -half_side + (j as f64 + 0.5) * h;
            for l in 0..n {
                let z = -half_side + (l as f64 + 0.5) * h;
                let r2 = x * x + y * y + z * z;
                let w = 6.0 * g_sq(r2.sqrt()) / (1.0 + 0.5 * r2);
                acc[0] += w * x;
                acc[1] += w * y;
                acc[2] += w * z;
            }
        }
    }
    acc.map(|s| s * h * h * h)
}

/// One field operator in a word, in plain data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field {
    pub creator: bool,
    pub time: f64,
    pub k: [f64; 3],
    pub label: usize,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy)]
struct Contraction {
    t_lead: f64,
    t_trail: f64,
    k: [f64; 3],
    volume: f64,
    /// Argument of the p-function is `p + shift`.
    shift: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
enum Item {
    Op(Field),
    Fun(Contraction),
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn q(t: f64, x: f64, lambda: f64) -> Complex64 {
    Complex64::from_polar(1.0, -t * x / (lambda * lambda))
}

/// Vacuum expectation by exhaustive normal ordering. The rightmost
/// annihilator is repeatedly moved one place to the right:
///
/// * past a creator: `a a† = a† a q_λ(t−t', k·k') + [same label] λ⁻² q_λ(t−t', D(k,p))/vol`,
/// * past a p-function: `a F(p) = F(p − k) a`,
///
/// and terms with an annihilator at the right end or a surviving creator are
/// dropped. Remaining p-functions are evaluated at `p̄`.
pub fn correlator_brute_force<W: Fn(f64) -> f64>(
    word: &[Field],
    omega: W,
    p_bar: [f64; 3],
    lambda: f64,
) -> Complex64 {
    let detuning = |k: [f64; 3], p: [f64; 3]| omega(dot(k, k).sqrt()) - dot(k, p) + 0.5 * dot(k, k);
    let mut stack: Vec<(Complex64, Vec<Item>)> = vec![(
        Complex64::new(1.0, 0.0),
        word.iter().map(|f| Item::Op(*f)).collect(),
    )];
    let mut total = Complex64::default();
    while let Some((coef, items)) = stack.pop() {
        let rightmost = items
            .iter()
            .rposition(|it| matches!(it, Item::Op(f) if !f.creator));
        let Some(r) = rightmost else {
            if items.iter().any(|it| matches!(it, Item::Op(_))) {
                continue;
            }
            let mut v = coef;
            for it in &items {
                if let Item::Fun(c) = it {
                    let p = [
                        p_bar[0] + c.shift[0],
                        p_bar[1] + c.shift[1],
                        p_bar[2] + c.shift[2],
                    ];
                    v *= q(c.t_lead - c.t_trail, detuning(c.k, p), lambda)
                        / (lambda * lambda * c.volume);
                }
            }
            total += v;
            continue;
        };
        if r + 1 == items.len() {
            continue;
        }
        let Item::Op(ann) = items[r] else {
            unreachable!()
        };
        match items[r + 1] {
            Item::Op(cre) => {
                let mut swapped = items.clone();
                swapped.swap(r, r + 1);
                stack.push((
                    coef * q(ann.time - cre.time, dot(ann.k, cre.k), lambda),
                    swapped,
                ));
                if cre.label == ann.label {
                    let mut contracted = items.clone();
                    contracted.splice(
                        r..r + 2,
                        [Item::Fun(Contraction {
                            t_lead: ann.time,
                            t_trail: cre.time,
                            k: ann.k,
                            volume: ann.volume,
                            shift: [0.0; 3],
                        })],
                    );
                    stack.push((coef, contracted));
                }
            }
            Item::Fun(mut c) => {
                for n in 0..3 {
                    c.shift[n] -= ann.k[n];
                }
                let mut moved = items.clone();
                moved[r] = Item::Fun(c);
                moved[r + 1] = Item::Op(ann);
                stack.push((coef, moved));
            }
        }
    }
    total
}

/// Tensor-product trapezoid rule; spectrally accurate for integrands that
/// decay like Gaussians inside the box.
pub fn tensor_trapezoid<F: Fn(&[f64]) -> Complex64>(
    f: F,
    ranges: &[(f64, f64, usize)],
) -> Complex64 {
    let dims = ranges.len();
    let mut idx = vec![0usize; dims];
    let mut x = vec![0.0; dims];
    let mut total = Complex64::default();
    let cell: f64 = ranges.iter().map(|&(a, b, n)| (b - a) / n as f64).product();
    loop {
        let mut w = 1.0;
        for d in 0..dims {
            let (a, b, n) = ranges[d];
            x[d] = a + (b - a) * idx[d] as f64 / n as f64;
            if idx[d] == 0 || idx[d] == n {
                w *= 0.5;
            }
        }
        total += f(&x) * w;
        let mut d = 0;
        loop {
            if d == dims {
                return total * cell;
            }
            idx[d] += 1;
            if idx[d] <= ranges[d].2 {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
