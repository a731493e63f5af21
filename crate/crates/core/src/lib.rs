// SPDX-License-Identifier: Apache-2.0

//! Stochastic-limit decay theory for a non-relativistic particle coupled to a
//! boson field.
//!
//! The crate computes the complex decay-rate kernel `(g|g)₋(p)` by analytic
//! angular reduction and adaptive radial quadrature, evaluates the survival
//! amplitude `X(t) = ∫dp |f(p)|² e^{-t (g|g)₋(p)}` for smeared particle states,
//! fits the asymptotic power-law tail, and checks the oscillating-exponent
//! limits and finite-λ vacuum correlators on which the limit equations rest.
//!
//! Module map:
//!
//! * [`model`]: dispersion law, radial cutoff profile `|g(k)|²`, vertex type,
//!   particle smearing and quadrature settings.
//! * [`ggkernel`]: the rate kernel, its small-momentum quadratic model and the
//!   coefficients `A` and `Q`.
//! * [`decay`]: survival amplitude, Gaussian closed form and tail fitting.
//! * [`qlimit`]: the oscillating exponent `q_λ` and its distributional limits.
//! * [`correlator`]: finite-λ vacuum correlators of the rescaled field.

pub mod chebyshev;
pub mod correlator;
pub mod decay;
mod error;
mod gaussian;
pub mod ggkernel;
pub mod model;
pub mod qlimit;
pub mod quad;
mod regression;

pub use error::{Error, Result};
pub use num_complex::Complex64;
