use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use tiltflow::flow::{simulate_paths, SimConfig};
use tiltflow::verify::stats::{ks_statistic, ks_two_sample, tail_estimate};
use tiltflow::verify::{
    check_bounds, check_derivative_identities, check_embedding_and_mean, check_martingales,
    check_restart_consistency, derivative_fd, exit_time_oracle, restart_samples, run_suites, summarize, BoundKind,
    Hypotheses, Suite, SuiteOptions,
};
use tiltflow::{Error, Measure, TiltParams};

fn two_point() -> Measure {
    Measure::atoms(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
}

#[test]
fn ks_on_stratified_normal_quantiles() {
    let mu = Measure::gaussian(1.0).unwrap();
    let n = 100;
    let xs: Vec<f64> = (0..n).map(|i| mu.quantile((i as f64 + 0.5) / n as f64)).collect();
    let d = ks_statistic(&xs, |x| mu.cdf(x));
    assert!(d <= 1.0 / n as f64, "{d}");
}

#[test]
fn gaussian_ensemble_passes_main_checks() {
    let mu = Measure::gaussian(1.0).unwrap();
    let cfg = SimConfig { seed: 4, checkpoint_times: vec![0.0, 0.5], ..SimConfig::for_measure(&mu).unwrap() };
    let paths = simulate_paths(&mu, &cfg, 0..1000).unwrap();
    let s = summarize(&mu, &paths).unwrap();
    for r in check_embedding_and_mean(&mu, &s, cfg.eps_a).unwrap() {
        assert!(r.passed, "{r:?}");
    }
    let m = check_martingales(1.0, &cfg.checkpoint_times, &paths).unwrap();
    // At t = 0 every identity holds exactly.
    for r in m.iter().filter(|r| r.check_name.ends_with("@0")) {
        assert!(r.statistic < 1e-12, "{r:?}");
    }
    // A_t = 1 - t on every path, up to stepping error.
    let at = m.iter().find(|r| r.check_name == "martingale_A_plus_t@0.5").unwrap();
    assert!(at.passed && at.statistic < 1e-5, "{at:?}");

    let hyp = Hypotheses { sigma: Some(1.0), ..Default::default() };
    let b = check_bounds(&paths, &mu, BoundKind::Unilc, &hyp, &cfg).unwrap();
    assert!(b.passed && b.statistic > 1.0 - 1e-3, "{b:?}");
}

#[test]
fn bounds_require_their_hypotheses() {
    let mu = Measure::uniform(-1.0, 1.0).unwrap();
    let cfg = SimConfig::for_measure(&mu).unwrap();
    let paths = simulate_paths(&mu, &cfg, 0..10).unwrap();
    let none = Hypotheses::default();
    assert!(matches!(check_bounds(&paths, &mu, BoundKind::Unilc, &none, &cfg), Err(Error::HypothesisNotAsserted(_))));
    let atoms = two_point();
    assert!(matches!(
        check_bounds(&paths, &atoms, BoundKind::LogconcaveAt, &none, &cfg),
        Err(Error::HypothesisNotAsserted(_))
    ));
    let r = check_bounds(&paths, &mu, BoundKind::CompactLc, &none, &cfg).unwrap();
    assert_eq!(r.threshold, 2.0 + 2.0 * cfg.eps_a + 5.0 * cfg.dt_max);
}

#[test]
fn gaussian_has_a_degenerate_tail() {
    let mu = Measure::gaussian(1.0).unwrap();
    let cfg = SimConfig::for_measure(&mu).unwrap();
    let ts: Vec<f64> = simulate_paths(&mu, &cfg, 0..10_000).unwrap().iter().map(|p| p.t_hat).collect();
    assert!(matches!(tail_estimate(&ts), Err(Error::DegenerateTail { .. })));
}

#[test]
fn exit_oracle_tail_rate() {
    // Survival of the exit time from (-1, 1) decays at rate π²/8.
    let ts = exit_time_oracle(-1.0, 1.0, 10_000, 21);
    let fit = tail_estimate(&ts).unwrap();
    let expected = std::f64::consts::PI.powi(2) / 8.0;
    assert!((fit.rate / expected - 1.0).abs() < 0.1, "{}", fit.rate);
}

#[test]
fn restart_at_time_zero_is_the_same_experiment() {
    let mu = Measure::uniform(-1.0, 1.0).unwrap();
    let cfg = SimConfig { seed: 6, ..SimConfig::for_measure(&mu).unwrap() };
    for r in check_restart_consistency(&mu, 0.0, &cfg, 300).unwrap() {
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn gaussian_restart_times_are_point_masses() {
    let mu = Measure::gaussian(1.0).unwrap();
    let cfg = SimConfig { seed: 6, ..SimConfig::for_measure(&mu).unwrap() };
    let r = restart_samples(&mu, 0.5, &cfg, 100).unwrap();
    for t in r.continued_t.iter().chain(&r.restarted_t) {
        assert_abs_diff_eq!(*t, 0.5, epsilon = 1e-3);
    }
    let (_, p) = ks_two_sample(&r.continued_w, &r.restarted_w);
    assert!(p > 0.01);
}

#[test]
fn derivative_identities_at_examples() {
    let mu = Measure::gaussian(1.0).unwrap();
    let fd = derivative_fd(&mu, TiltParams { b: 1.0, c: 2.0 }).unwrap();
    assert_abs_diff_eq!(fd[0].exact, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(fd[1].exact, 2.0, epsilon = 1e-12);
    assert!(fd.iter().all(|r| r.passed), "{fd:?}");

    let fd = derivative_fd(&two_point(), TiltParams { b: 0.5, c: 0.5 }).unwrap();
    assert!(fd.iter().all(|r| r.passed), "{fd:?}");
    for r in &fd {
        if let Some(o) = r.order {
            assert!((1.8..=2.2).contains(&o), "{r:?}");
        }
    }
}

#[test]
fn derivative_grid_rejects_negative_b() {
    let mu = two_point();
    let grid = [TiltParams { b: 0.0, c: 0.0 }];
    assert!(matches!(check_derivative_identities(&mu, &grid), Err(Error::InvalidConfig(_))));
}

#[test]
fn suites_select_their_checks() {
    let mu = Measure::uniform(-1.0, 1.0).unwrap();
    let opts = SuiteOptions {
        paths: 1000,
        config: SimConfig { seed: 2, ..SimConfig::for_measure(&mu).unwrap() },
        hyp: Hypotheses::default(),
        restart_s: None,
    };
    let compact = run_suites(&mu, &[Suite::Compact], &opts).unwrap();
    let names: Vec<&str> = compact.iter().map(|r| r.check_name.as_str()).collect();
    assert_eq!(
        names,
        ["pathwise_A_le_L2", "bound_T_le_2L2", "bound_T_le_2L2_beta_over_alpha", "pathwise_A_b_le_beta_over_alpha"]
    );
    assert!(compact.iter().all(|r| r.passed));

    let deriv = run_suites(&mu, &[Suite::Derivatives], &opts).unwrap();
    assert_eq!(deriv.len(), 4);
    assert!(deriv.iter().all(|r| r.passed), "{deriv:?}");

    assert!(matches!(run_suites(&mu, &[Suite::Unilc], &opts), Err(Error::HypothesisNotAsserted(_))));
}

#[test]
fn too_few_paths_is_an_error() {
    let mu = Measure::uniform(-1.0, 1.0).unwrap();
    let cfg = SimConfig::for_measure(&mu).unwrap();
    let paths = simulate_paths(&mu, &cfg, 0..20).unwrap();
    let s = summarize(&mu, &paths).unwrap();
    assert!(matches!(check_embedding_and_mean(&mu, &s, cfg.eps_a), Err(Error::InsufficientPaths { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn two_sample_ks_is_symmetric_and_bounded(
        x in prop::collection::vec(-5.0f64..5.0, 1..60),
        y in prop::collection::vec(-5.0f64..5.0, 1..60),
    ) {
        let (d1, p1) = ks_two_sample(&x, &y);
        let (d2, p2) = ks_two_sample(&y, &x);
        prop_assert_eq!(d1, d2);
        prop_assert_eq!(p1, p2);
        prop_assert!((0.0..=1.0).contains(&d1) && (0.0..=1.0).contains(&p1));
    }

    #[test]
    fn ks_statistic_is_shift_sensitive(shift in 0.5f64..3.0) {
        let mu = Measure::gaussian(1.0).unwrap();
        let xs: Vec<f64> = (0..200).map(|i| mu.quantile((i as f64 + 0.5) / 200.0)).collect();
        let base = ks_statistic(&xs, |x| mu.cdf(x));
        let moved: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        prop_assert!(ks_statistic(&moved, |x| mu.cdf(x)) > base);
    }
}
