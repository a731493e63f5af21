// SPDX-License-Identifier: Apache-2.0

use polaron_decay::decay::gaussian_closed_form;
use polaron_decay::ggkernel::{angular_reduce, gg_minus};
use polaron_decay::model::{ModelConfig, QuadratureSpec, RadialProfile, Vertex};
use polaron_decay::qlimit::{lemma_oscillatory_factor, q_lambda};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn q_lambda_is_unimodular(t in -1e3f64..1e3, x in -50.0f64..50.0, l in 1e-3f64..10.0) {
        prop_assert!((q_lambda(t, x, l).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn q_lambda_is_additive(t in -10.0f64..10.0, s in -10.0f64..10.0, x in -5.0f64..5.0, l in 0.1f64..2.0) {
        let lhs = q_lambda(t, x, l) * q_lambda(s, x, l);
        let rhs = q_lambda(t + s, x, l);
        // phases up to ~10⁴ radians lose a few ulps each
        prop_assert!((lhs - rhs).norm() < 1e-11);
    }

    #[test]
    fn lemma_factor_is_bounded(t in -20.0f64..20.0, dt in 1e-3f64..20.0, x in 0.01f64..10.0, l in 0.01f64..1.0, neg in any::<bool>()) {
        let x = if neg { -x } else { x };
        let v = lemma_oscillatory_factor(t, dt, x, l);
        prop_assert!(v.norm() <= (2.0 * l * l / x.abs()).min(dt) * (1.0 + 1e-12));
    }

    #[test]
    fn angular_delta_part_is_nonnegative(a in -5.0f64..5.0, b in -5.0f64..5.0, c0 in 0.0f64..4.0, c1 in -2.0f64..2.0) {
        prop_assume!(b != 0.0 || a != 0.0);
        let r = angular_reduce(a, b, c0, c1).unwrap();
        prop_assert!(r.delta_part >= 0.0);
        if a.abs() > b.abs() {
            prop_assert_eq!(r.delta_part, 0.0);
        }
    }

    #[test]
    fn angular_reduce_is_linear_in_numerator(a in 1.1f64..5.0, b in -1.0f64..1.0, c0 in -2.0f64..2.0, c1 in -2.0f64..2.0) {
        let full = angular_reduce(a, b, c0, c1).unwrap().pv_part;
        let split = angular_reduce(a, b, c0, 0.0).unwrap().pv_part + angular_reduce(a, b, 0.0, c1).unwrap().pv_part;
        prop_assert!((full - split).abs() <= 1e-12 * (1.0 + full.abs()));
    }

    #[test]
    fn closed_form_modulus_decreases(a in 0.1f64..50.0, b in 0.5f64..200.0, t in 0.0f64..1e3, dt in 1e-3f64..10.0) {
        prop_assert!(gaussian_closed_form(a, b, t + dt).norm() < gaussian_closed_form(a, b, t).norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn damping_is_nonnegative(p in 0.0f64..3.0) {
        let m = ModelConfig::unit_dispersion(RadialProfile::compact_bump(1.0, 2.0, 1.0), Vertex::Dipole);
        let r = gg_minus(&m, p, &QuadratureSpec::default()).unwrap();
        prop_assert!(r.re >= 0.0);
    }
}
