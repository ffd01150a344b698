use std::f64::consts::PI;

use proptest::prelude::*;

use bipolar_ep::oracle::{fd_check_rhs, reference_simulate, ReferenceBudget, Stencil};
use bipolar_ep::solver::{
    initial_state, nonlinear_rhs, simulate, trajectory_deviation, Form, InitialData, ModeSpec,
    SimConfig, Slot,
};
use bipolar_ep::spectral::{FourierBox, GridSpec};
use bipolar_ep::state::{PressureLaw, SumDiffState};
use bipolar_ep::Error;

fn mode(field: Slot, m: i64, cos: f64, sin: f64) -> ModeSpec {
    ModeSpec {
        field,
        component: 0,
        mode: [m, 0, 0],
        cos,
        sin,
    }
}

fn single_mode_config(n: usize) -> SimConfig {
    let mut c = SimConfig::band_limited(GridSpec::new(n, 2.0 * PI, 1).unwrap(), 0.01, 0, 0.01, 0.1);
    c.initial = InitialData::Modes {
        modes: vec![
            mode(Slot::N1, 1, 1.0, 0.0),
            mode(Slot::W1, 1, 0.0, 1.0),
            mode(Slot::N2, 1, 0.0, 0.5),
            mode(Slot::W2, 1, 0.5, 0.0),
        ],
    };
    c
}

fn fields(s: &SumDiffState) -> Vec<&[f64]> {
    let mut out = vec![s.n1.values(), s.n2.values()];
    out.extend(s.w1.iter().chain(&s.w2).map(|f| f.values()));
    out
}

/// Largest pointwise gap between spectral and FD sources, relative to the FD size.
fn rhs_gap(config: &SimConfig, stencil: Stencil) -> f64 {
    let fb = FourierBox::new(config.grid).unwrap();
    let state = initial_state(config).unwrap();
    let spectral = nonlinear_rhs(&fb, &config.law, &state, true)
        .unwrap()
        .terms
        .to_physical(&fb)
        .unwrap();
    let fd = fd_check_rhs(&state.to_physical(&fb).unwrap(), &config.law, stencil).unwrap();
    let (mut gap, mut scale) = (0.0_f64, 0.0_f64);
    for (a, b) in fields(&spectral).into_iter().zip(fields(&fd)) {
        for (x, y) in a.iter().zip(b) {
            gap = gap.max((x - y).abs());
            scale = scale.max(y.abs());
        }
    }
    gap / scale
}

#[test]
fn single_mode_sources_match_finite_differences() {
    let gap = rhs_gap(&single_mode_config(512), Stencil::Extrapolated);
    assert!(gap <= 1e-6, "{gap:e}");
}

#[test]
fn centered_stencil_converges_at_second_order() {
    let coarse = rhs_gap(&single_mode_config(128), Stencil::Centered);
    let fine = rhs_gap(&single_mode_config(256), Stencil::Centered);
    let ratio = coarse / fine;
    assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
}

#[test]
fn three_dimensional_sources_converge_to_finite_differences() {
    let config = |n| SimConfig::band_limited(GridSpec::new(n, 2.0 * PI, 3).unwrap(), 0.01, 4, 0.01, 0.1);
    let coarse = rhs_gap(&config(32), Stencil::Extrapolated);
    let fine = rhs_gap(&config(64), Stencil::Extrapolated);
    assert!(fine <= 1e-3, "{fine:e}");
    let ratio = coarse / fine;
    assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
}

#[test]
fn zero_data_stays_at_the_background() {
    let c = SimConfig::band_limited(GridSpec::new(8, 2.0 * PI, 3).unwrap(), 0.0, 1, 0.1, 1.0);
    let reference = reference_simulate(&c, &ReferenceBudget::default()).unwrap();
    assert!(reference.snapshots.iter().all(|s| s.state.l2_norm() == 0.0));
}

#[test]
fn small_data_run_matches_the_reference() {
    let c = SimConfig::band_limited(GridSpec::new(8, 2.0 * PI, 3).unwrap(), 1e-3, 2, 0.05, 1.0);
    let coarse = simulate(&c).unwrap();
    let reference = reference_simulate(&c, &ReferenceBudget::default()).unwrap();
    let dev = trajectory_deviation(&coarse, &reference).unwrap();
    assert_eq!(dev.compared, coarse.snapshots.len());
    assert!(dev.max_absolute <= 1e-5, "{:e}", dev.max_absolute);
}

#[test]
fn reference_errors_shrink_at_second_order() {
    let grid = GridSpec::new(32, 2.0 * PI, 1).unwrap();
    let base = SimConfig::band_limited(grid, 0.05, 8, 0.02, 1.0);
    let reference = reference_simulate(&base, &ReferenceBudget::default()).unwrap();
    let errors: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&dt| {
            let mut c = base.clone();
            c.dt = dt;
            trajectory_deviation(&simulate(&c).unwrap(), &reference).unwrap().max_absolute
        })
        .collect();
    let slope = (errors[0] / errors[2]).log2() / 2.0;
    assert!((slope - 2.0).abs() < 0.3, "{errors:?} slope {slope}");
}

#[test]
fn reference_budget_is_enforced() {
    let c = SimConfig::band_limited(GridSpec::new(32, 2.0 * PI, 3).unwrap(), 1e-3, 2, 0.01, 10.0);
    let err = reference_simulate(&c, &ReferenceBudget::default()).unwrap_err();
    assert!(matches!(err, Error::ResourceGuard(_)));
}

#[test]
fn forms_agree_on_a_short_run() {
    let mut c = single_mode_config(32);
    c.dt = 1e-3;
    c.t_end = 0.5;
    let a = simulate(&c).unwrap();
    c.form = Form::Primitive;
    let b = simulate(&c).unwrap();
    let dev = trajectory_deviation(&a, &b).unwrap();
    assert!(dev.max_relative <= 1e-6, "{:e}", dev.max_relative);
}

#[test]
fn large_data_fail_with_time_stamp() {
    let mut c = single_mode_config(32);
    c.epsilon = 1.2;
    c.t_end = 1.0;
    match simulate(&c) {
        Err(Error::Step { t, .. }) => assert!((0.0..=1.0).contains(&t)),
        other => panic!("expected a step failure, got {:?}", other.map(|t| t.snapshots.len())),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn means_are_preserved(seed in any::<u64>(), eps in 1e-4f64..0.05, form in prop::sample::select(vec![Form::Sumdiff, Form::Primitive])) {
        let mut c = SimConfig::band_limited(GridSpec::new(16, 2.0 * PI, 1).unwrap(), eps, seed, 0.02, 1.0);
        c.form = form;
        c.law = PressureLaw::new(1.4).unwrap();
        let t = simulate(&c).unwrap();
        prop_assert!(t.diagnostics.max_difference_mean <= 1e-12);
        prop_assert!(t.diagnostics.max_mean_drift[0] <= 1e-12);
        prop_assert!(t.diagnostics.max_mean_drift[1] <= 1e-12);
        prop_assert!(t.snapshots.iter().all(|s| s.norms.is_finite()));
    }

    #[test]
    fn linear_runs_scale_exactly(seed in any::<u64>(), scale in 0.1f64..10.0) {
        let grid = GridSpec::new(8, 2.0 * PI, 3).unwrap();
        let mut c = SimConfig::band_limited(grid, 1e-3, seed, 0.05, 0.5);
        c.nonlinear = false;
        let a = simulate(&c).unwrap();
        c.epsilon *= scale;
        let b = simulate(&c).unwrap();
        let gap = b.last().state.add_scaled(&a.last().state, -scale).unwrap().l2_norm();
        prop_assert!(gap <= 1e-12 * b.last().state.l2_norm());
    }
}
