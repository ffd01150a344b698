use proptest::prelude::*;

use bipolar_ep::decay::{
    fit_exponent, geometric_times, rate_report, Component, DecayExperiment, FitMode, RadialProfile,
};
use bipolar_ep::propagators::SymbolKind;

fn experiment(kind: SymbolKind, k: u32, amplitude: f64, tolerance: f64) -> DecayExperiment {
    DecayExperiment::new(
        kind,
        RadialProfile::gaussian(amplitude, 1.0).unwrap(),
        RadialProfile::Zero,
        k,
        vec![1.0],
        tolerance,
    )
    .unwrap()
}

fn euler_total(e: &DecayExperiment, t: f64) -> f64 {
    let n = e.l2_norm_at(Component::N, t).unwrap();
    let w = e.l2_norm_at(Component::W, t).unwrap();
    n.hypot(w)
}

#[test]
fn poisson_block_outpaces_euler_block() {
    let ed = experiment(SymbolKind::EulerDamped, 0, 1.0, 1e-8);
    let ep = experiment(SymbolKind::EulerPoissonDamped, 0, 1.0, 1e-8);
    let ratio = |t| ep.block_norm_at(t).unwrap() / euler_total(&ed, t);
    let (early, late) = (ratio(1.0), ratio(100.0));
    assert!(late < 1e-6 * early, "{early:e} {late:e}");
}

#[test]
fn each_derivative_costs_half_a_power() {
    let k0 = rate_report(SymbolKind::EulerDamped, 0).unwrap();
    let k1 = rate_report(SymbolKind::EulerDamped, 1).unwrap();
    for (a, b) in k0.rows.iter().zip(&k1.rows) {
        let penalty = b.fit.slope - a.fit.slope;
        assert!((penalty + 0.5).abs() <= 0.05, "{}: {penalty}", a.component);
    }
}

#[test]
fn euler_density_slope_is_near_three_quarters() {
    let report = rate_report(SymbolKind::EulerDamped, 0).unwrap();
    let slope = report.rows.iter().find(|r| r.component == "n").unwrap().fit.slope;
    assert!((-0.80..=-0.70).contains(&slope), "{slope}");
}

#[test]
fn tightening_the_tolerance_moves_norms_less_than_the_tolerance() {
    for kind in SymbolKind::ALL {
        for t in [0.5, 5.0, 50.0] {
            let loose = experiment(kind, 1, 1.0, 1e-6).l2_norm_at(Component::N, t).unwrap();
            let tight = experiment(kind, 1, 1.0, 5e-7).l2_norm_at(Component::N, t).unwrap();
            assert!((loose - tight).abs() <= 1e-6 * tight, "{kind:?} t={t}: {loose} {tight}");
        }
    }
}

#[test]
fn short_times_recover_the_initial_norm() {
    let profile = RadialProfile::gaussian(1.0, 1.0).unwrap();
    let e = experiment(SymbolKind::EulerDamped, 0, 1.0, 1e-10);
    let n = e.l2_norm_at(Component::N, 1e-9).unwrap();
    let expected = profile.l2_norm_sq().sqrt();
    assert!((n - expected).abs() <= 1e-7 * expected, "{n} {expected}");
    assert!(e.l2_norm_at(Component::W, 1e-9).unwrap() <= 1e-7 * expected);
}

#[test]
fn zero_data_give_zero_norms() {
    let e = DecayExperiment::new(
        SymbolKind::EulerPoissonDamped,
        RadialProfile::Zero,
        RadialProfile::Zero,
        1,
        geometric_times(1.0, 10.0, 5).unwrap(),
        1e-8,
    )
    .unwrap();
    assert!(e.block_series().unwrap().iter().all(|&(_, v)| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norms_are_linear_in_the_amplitude(amplitude in 0.01f64..100.0, t in 0.1f64..30.0) {
        for kind in SymbolKind::ALL {
            let unit = experiment(kind, 0, 1.0, 1e-8).block_norm_at(t).unwrap();
            let scaled = experiment(kind, 0, amplitude, 1e-8).block_norm_at(t).unwrap();
            prop_assert!((scaled - amplitude * unit).abs() <= 1e-7 * scaled);
        }
    }

    #[test]
    fn fits_recover_exact_laws(rate in 0.05f64..3.0, scale in 1e-3f64..1e3) {
        let times = geometric_times(10.0, 1e3, 25).unwrap();
        let power: Vec<_> = times.iter().map(|&t| (t, scale * (1.0 + t).powf(-rate))).collect();
        let fit = fit_exponent(&power, FitMode::Algebraic).unwrap();
        prop_assert!((fit.slope + rate).abs() <= 1e-10);
        let exp: Vec<_> = times.iter().map(|&t| (t / 100.0, scale * (-rate * t / 100.0).exp())).collect();
        let fit = fit_exponent(&exp, FitMode::Exponential).unwrap();
        prop_assert!((fit.slope + rate).abs() <= 1e-10);
        prop_assert!(fit.residual <= 1e-10);
    }

    #[test]
    fn norms_never_increase(t in 0.1f64..50.0, dt in 0.1f64..20.0) {
        for kind in SymbolKind::ALL {
            let e = experiment(kind, 0, 1.0, 1e-8);
            let (a, b) = (e.block_norm_at(t).unwrap(), e.block_norm_at(t + dt).unwrap());
            prop_assert!(b <= a * (1.0 + 1e-7));
        }
    }
}
