// SPDX-License-Identifier: Apache-2.0

//! Piecewise Chebyshev interpolation with automatic interval splitting.
//!
//! Used to tabulate expensive smooth functions (the rate kernel as a function
//! of particle momentum) once, so that oscillatory outer integrals can sample
//! them millions of times. A piece is accepted when the trailing coefficients
//! fall below tolerance; otherwise it is bisected, which grades the mesh
//! geometrically towards square-root or logarithmic singular points.

const DEGREE: usize = 32;

#[derive(Debug, Clone)]
struct Piece<const N: usize> {
    a: f64,
    b: f64,
    coeffs: Vec<[f64; N]>,
}

#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev<const N: usize> {
    pieces: Vec<Piece<N>>,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_depth: 40,
        }
    }
}

fn chebyshev_coefficients<const N: usize>(values: &[[f64; N]]) -> Vec<[f64; N]> {
    let n = values.len() - 1;
    let mut coeffs = vec![[0.0; N]; n + 1];
    for (k, c) in coeffs.iter_mut().enumerate() {
        for (j, v) in values.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            let basis = (std::f64::consts::PI * (j * k) as f64 / n as f64).cos();
            for m in 0..N {
                c[m] += w * v[m] * basis;
            }
        }
        let scale = if k == 0 || k == n {
            1.0 / n as f64
        } else {
            2.0 / n as f64
        };
        for cm in c.iter_mut() {
            *cm *= scale;
        }
    }
    coeffs
}

fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + coeffs[0]
}

fn derivative_coefficients(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for k in (0..n).rev() {
        d[k] = d.get(k + 2).copied().unwrap_or(0.0) + 2.0 * (k + 1) as f64 * coeffs[k + 1];
    }
    d[0] *= 0.5;
    d.truncate(n);
    d
}

impl<const N: usize> PiecewiseChebyshev<N> {
    /// Fits `f` on `[a, b]`, splitting first at each interior entry of `breaks`.
    pub fn fit<E, F>(f: F, a: f64, b: f64, breaks: &[f64], opts: FitOptions) -> Result<Self, E>
    where
        F: Fn(f64) -> Result<[f64; N], E>,
    {
        let mut edges = vec![a];
        edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        edges.push(b);
        edges.sort_by(f64::total_cmp);
        edges.dedup();

        let mut pieces = Vec::new();
        for w in edges.windows(2) {
            fit_recursive(&f, w[0], w[1], opts, 0, &mut pieces)?;
        }
        Ok(PiecewiseChebyshev { pieces })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].a, self.pieces[self.pieces.len() - 1].b)
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    fn locate(&self, x: f64) -> &Piece<N> {
        let idx = self.pieces.partition_point(|p| p.b < x);
        &self.pieces[idx.min(self.pieces.len() - 1)]
    }

    pub fn eval(&self, x: f64) -> [f64; N] {
        let p = self.locate(x);
        let u = (2.0 * x - p.a - p.b) / (p.b - p.a);
        let mut out = [0.0; N];
        let mut column = vec![0.0; p.coeffs.len()];
        for (m, o) in out.iter_mut().enumerate() {
            for (c, src) in column.iter_mut().zip(&p.coeffs) {
                *c = src[m];
            }
            *o = clenshaw(&column, u);
        }
        out
    }

    /// First derivative of component `m`.
    pub fn derivative(&self, x: f64, m: usize) -> f64 {
        let p = self.locate(x);
        let u = (2.0 * x - p.a - p.b) / (p.b - p.a);
        let column: Vec<f64> = p.coeffs.iter().map(|c| c[m]).collect();
        let d = derivative_coefficients(&column);
        clenshaw(&d, u) * 2.0 / (p.b - p.a)
    }

    /// Second derivative of component `m`.
    pub fn second_derivative(&self, x: f64, m: usize) -> f64 {
        let p = self.locate(x);
        let u = (2.0 * x - p.a - p.b) / (p.b - p.a);
        let column: Vec<f64> = p.coeffs.iter().map(|c| c[m]).collect();
        let d2 = derivative_coefficients(&derivative_coefficients(&column));
        let scale = 2.0 / (p.b - p.a);
        clenshaw(&d2, u) * scale * scale
    }
}

fn fit_recursive<const N: usize, E, F>(
    f: &F,
    a: f64,
    b: f64,
    opts: FitOptions,
    depth: usize,
    out: &mut Vec<Piece<N>>,
) -> Result<(), E>
where
    F: Fn(f64) -> Result<[f64; N], E>,
{
    let mut values = Vec::with_capacity(DEGREE + 1);
    for j in 0..=DEGREE {
        // Extrema nodes, ordered so index 0 maps to u = 1.
        let u = (std::f64::consts::PI * j as f64 / DEGREE as f64).cos();
        let x = 0.5 * (a + b) + 0.5 * (b - a) * u;
        values.push(f(x)?);
    }
    let coeffs = chebyshev_coefficients(&values);

    let resolved = (0..N).all(|m| {
        let scale = values.iter().map(|v| v[m].abs()).fold(0.0, f64::max);
        let tail = coeffs[DEGREE - 2..]
            .iter()
            .map(|c| c[m].abs())
            .fold(0.0, f64::max);
        tail <= opts.rel_tol * scale + opts.abs_tol
    });

    if resolved || depth >= opts.max_depth {
        out.push(Piece { a, b, coeffs });
        return Ok(());
    }
    let mid = 0.5 * (a + b);
    fit_recursive(f, a, mid, opts, depth + 1, out)?;
    fit_recursive(f, mid, b, opts, depth + 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_function_single_piece() {
        let t = PiecewiseChebyshev::<1>::fit(
            |x: f64| Ok::<_, ()>([(3.0 * x).sin() * (-x).exp()]),
            0.0,
            2.0,
            &[],
            FitOptions::default(),
        )
        .unwrap();
        assert_eq!(t.piece_count(), 1);
        for i in 0..=50 {
            let x = 2.0 * i as f64 / 50.0;
            let exact = (3.0 * x).sin() * (-x).exp();
            assert!((t.eval(x)[0] - exact).abs() < 1e-13);
            let d = 3.0 * (3.0 * x).cos() * (-x).exp() - exact;
            assert!((t.derivative(x, 0) - d).abs() < 1e-10);
        }
    }

    #[test]
    fn grades_towards_sqrt_singularity() {
        let t = PiecewiseChebyshev::<1>::fit(
            |x: f64| Ok::<_, ()>([(1.0 - x).max(0.0).sqrt()]),
            0.0,
            1.0,
            &[],
            FitOptions {
                max_depth: 30,
                ..FitOptions::default()
            },
        )
        .unwrap();
        assert!(t.piece_count() > 5);
        assert!((t.eval(0.5)[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((t.eval(0.99)[0] - 0.01f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn second_derivative_of_quadratic() {
        let t = PiecewiseChebyshev::<1>::fit(
            |x: f64| Ok::<_, ()>([4.0 - 7.0 * x * x]),
            0.0,
            1.0,
            &[],
            FitOptions::default(),
        )
        .unwrap();
        let d2 = t.second_derivative(0.0, 0);
        assert!((d2 + 14.0).abs() < 1e-7, "{d2}");
    }
}
