use proptest::prelude::*;

use bipolar_ep::oracle::{matrix_relative_error, ode_propagator, verify_symbols, OdeOracleConfig, VerifyOptions};
use bipolar_ep::propagators::{det, eigenvalues, mat_mul, propagator, SymbolKind};

fn kinds() -> impl Strategy<Value = SymbolKind> {
    prop::sample::select(SymbolKind::ALL.to_vec())
}

fn radius() -> impl Strategy<Value = f64> {
    (-3.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_follows_liouville(kind in kinds(), r in radius(), t in 0.0f64..30.0) {
        let g = propagator(kind, r, t).unwrap().matrix;
        // det is a difference of products of size ‖G‖², so rounding sets a floor.
        let size = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((det(&g) - (-t).exp()).abs() <= 1e-10 * (-t).exp() + 1e-15 * size * size);
    }

    #[test]
    fn semigroup_law(kind in kinds(), r in radius(), t in 0.0f64..10.0, s in 0.0f64..10.0) {
        let whole = propagator(kind, r, t + s).unwrap().matrix;
        let split = mat_mul(&propagator(kind, r, t).unwrap().matrix, &propagator(kind, r, s).unwrap().matrix);
        prop_assert!(matrix_relative_error(&split, &whole) <= 1e-10);
    }

    #[test]
    fn eigenvalues_have_trace_minus_one(kind in kinds(), r in radius()) {
        let e = eigenvalues(kind, r).unwrap();
        prop_assert!((e.sum() + 1.0).norm() <= 1e-14);
        prop_assert!((e.product().re / kind.determinant(r) - 1.0).abs() <= 1e-14);
        prop_assert!(e.product().im.abs() <= 1e-14 * kind.determinant(r));
    }

    #[test]
    fn closed_form_matches_the_ode(kind in kinds(), r in radius(), t in 0.01f64..5.0) {
        let closed = propagator(kind, r, t).unwrap().matrix;
        let ode = ode_propagator(kind, r, t, &OdeOracleConfig::default()).unwrap();
        prop_assert!(matrix_relative_error(&closed, &ode) <= 1e-6);
    }

    #[test]
    fn propagators_contract_for_euler_poisson(r in radius(), t in 1.0f64..20.0) {
        let g = propagator(SymbolKind::EulerPoissonDamped, r, t).unwrap().matrix;
        let worst = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        // Largest entry is bounded by a constant multiple of e^{-t/2} uniformly in r.
        prop_assert!(worst <= 10.0 * (-0.5 * t).exp() * (1.0 + 1.0 / r.min(1.0)));
    }
}

#[test]
fn identity_at_time_zero() {
    for kind in SymbolKind::ALL {
        for r in [1e-3, 0.3, 0.5, 0.7, 50.0] {
            let g = propagator(kind, r, 0.0).unwrap().matrix;
            assert!(matrix_relative_error(&g, &[[1.0, 0.0], [0.0, 1.0]]) <= 1e-14);
        }
    }
}

#[test]
fn critical_radius_is_continuous() {
    // The Euler discriminant vanishes at r = 1/2.
    for t in [0.1, 1.0, 10.0] {
        let at = propagator(SymbolKind::EulerDamped, 0.5, t).unwrap().matrix;
        for r in [0.5 - 1e-9, 0.5 + 1e-9] {
            let near = propagator(SymbolKind::EulerDamped, r, t).unwrap().matrix;
            assert!(matrix_relative_error(&near, &at) <= 1e-7);
        }
    }
}

#[test]
fn sign_flip_is_caught() {
    let opts = VerifyOptions {
        samples: 10,
        flip_poisson_sign: true,
        ..Default::default()
    };
    let report = verify_symbols(&opts).unwrap();
    assert!(!report.pass());
    assert!(!report.check("oracle", SymbolKind::EulerPoissonDamped).unwrap().pass);
    assert!(report.check("oracle", SymbolKind::EulerDamped).unwrap().pass);
}
