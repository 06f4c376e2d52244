use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use tiltflow::flow::{
    run_ensemble, simulate_indexed, simulate_path, simulate_paths, step, BrownianDriver, PathState, Scheme, SharedPath,
    SimConfig, StopReason,
};
use tiltflow::verify::ks_test;
use tiltflow::{Measure, TiltParams};

fn two_point() -> Measure {
    Measure::atoms(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
}

#[test]
fn single_step_examples_on_the_gaussian() {
    let mu = Measure::gaussian(1.0).unwrap();
    let s = PathState::at(&mu, 0.0, TiltParams::ZERO).unwrap();
    assert_eq!((s.var, s.w), (1.0, 0.0));

    let e = step(&mu, &s, 0.3, 0.1, Scheme::Euler).unwrap();
    assert_abs_diff_eq!(e.tilt.b, 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(e.tilt.c, 0.3, epsilon = 1e-15);
    assert_abs_diff_eq!(e.a, 0.3 / 1.1, epsilon = 1e-12);
    assert_abs_diff_eq!(e.w, 0.3, epsilon = 1e-15);

    let r = step(&mu, &s, 0.3, 0.1, Scheme::RootDriven).unwrap();
    assert_abs_diff_eq!(r.tilt.b, 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(r.tilt.c, 0.33, epsilon = 1e-12);
    assert_abs_diff_eq!(r.a, 0.3, epsilon = 1e-12);
    assert_eq!(r.w, 0.3);
}

#[test]
fn gaussian_paths_stop_at_unit_time() {
    let mu = Measure::gaussian(1.0).unwrap();
    let cfg = SimConfig { eps_a: 1e-4, seed: 3, ..SimConfig::for_measure(&mu).unwrap() };
    let paths = simulate_paths(&mu, &cfg, 0..50).unwrap();
    for p in &paths {
        assert!((0.98..=1.02).contains(&p.t_hat), "{}", p.t_hat);
        assert_eq!(p.stop_reason, StopReason::AVarBelowEps);
    }
}

#[test]
fn gaussian_ensemble_mean_and_law() {
    let mu = Measure::gaussian(1.0).unwrap();
    let cfg = SimConfig { seed: 11, ..SimConfig::for_measure(&mu).unwrap() };
    let (_, s) = run_ensemble(&mu, &cfg, 1000).unwrap();
    assert!((s.mean_t - 1.0).abs() < 0.01);
    assert!(s.ks_p > 0.01, "{}", s.ks_p);
}

#[test]
fn two_point_paths_end_on_the_atoms() {
    let mu = two_point();
    let cfg = SimConfig { seed: 5, ..SimConfig::for_measure(&mu).unwrap() };
    let (paths, _) = run_ensemble(&mu, &cfg, 400).unwrap();
    for p in &paths {
        assert_eq!(p.stop_reason, StopReason::HullEndpoint);
        assert!(p.w_t == 1.0 || p.w_t == -1.0);
    }
    let n = paths.len() as f64;
    let up = paths.iter().filter(|p| p.w_t > 0.0).count() as f64 / n;
    assert!((up - 0.5).abs() <= 3.0 * 0.5 / n.sqrt(), "{up}");
}

#[test]
fn dirac_stops_immediately() {
    let mu = Measure::atoms(vec![0.0], vec![1.0]).unwrap();
    let cfg = SimConfig { checkpoint_times: vec![0.5], ..SimConfig::for_measure(&mu).unwrap() };
    let p = simulate_indexed(&mu, &cfg, 0).unwrap();
    assert_eq!((p.t_hat, p.w_t, p.n_steps), (0.0, 0.0, 0));
    assert_eq!(p.checkpoints.len(), 1);
}

#[test]
fn ensembles_are_reproducible_and_order_free() {
    let mu = Measure::uniform(-1.0, 1.0).unwrap();
    let cfg = SimConfig { seed: 42, checkpoint_times: vec![0.1], ..SimConfig::for_measure(&mu).unwrap() };
    let all = simulate_paths(&mu, &cfg, 0..40).unwrap();
    assert_eq!(all, simulate_paths(&mu, &cfg, 0..40).unwrap());
    assert_eq!(&all[25..], &simulate_paths(&mu, &cfg, 25..40).unwrap()[..]);
    let other = simulate_paths(&mu, &SimConfig { seed: 43, ..cfg.clone() }, 0..40).unwrap();
    assert_ne!(all, other);
}

/// Driver that reads increments off a fixed Brownian path.
struct Shared(SharedPath, tiltflow::flow::IncrementStream);

impl BrownianDriver for Shared {
    fn increment(&mut self, t: f64, dt: f64) -> f64 {
        self.0.value(t + dt) - self.0.value(t)
    }

    fn uniform(&mut self) -> f64 {
        self.1.uniform()
    }
}

fn shared(seed: u64, id: u64) -> Shared {
    Shared(SharedPath::new(seed, id), tiltflow::flow::IncrementStream::new(seed, id))
}

#[test]
fn euler_scheme_gap_shrinks_with_the_step() {
    let mu = Measure::gaussian(1.0).unwrap();
    let mean_gap = |dt_max: f64| {
        let cfg = SimConfig {
            dt_max,
            scheme: Scheme::Euler,
            checkpoint_times: vec![0.5],
            ..SimConfig::for_measure(&mu).unwrap()
        };
        let n = 40;
        (0..n)
            .map(|i| {
                let p = simulate_path(&mu, &cfg, TiltParams::ZERO, &mut shared(9, i)).unwrap();
                let c = p.checkpoints[0];
                (c.a - c.w).abs()
            })
            .sum::<f64>()
            / n as f64
    };
    let (g4, g2, g1) = (mean_gap(4e-3), mean_gap(2e-3), mean_gap(1e-3));
    assert!(g4 > g2 && g2 > g1, "{g4} {g2} {g1}");
}

#[test]
fn root_driven_scheme_tracks_the_mean() {
    let mu = Measure::laplace(std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let cfg = SimConfig { seed: 2, ..SimConfig::for_measure(&mu).unwrap() };
    for p in simulate_paths(&mu, &cfg, 0..20).unwrap() {
        assert!(p.extremes.max_gap <= 1e-8, "{}", p.extremes.max_gap);
    }
}

#[test]
fn stopped_rows_follow_the_convention() {
    let mu = two_point();
    let cfg = SimConfig { seed: 1, checkpoint_times: vec![0.01, 5.0], ..SimConfig::for_measure(&mu).unwrap() };
    let p = simulate_indexed(&mu, &cfg, 0).unwrap();
    let last = p.checkpoints[1];
    assert_eq!((last.t, last.w, last.var, last.s), (p.t_hat, p.w_t, 0.0, 0.0));
    // Atom probes carry the terminal indicator divided by the atom mass.
    let probes = cfg.probes.as_ref().unwrap();
    for k in 0..3 {
        let expect = if probes.points[k] == p.w_t { 2.0 } else { 0.0 };
        assert_eq!(last.e[k], expect);
    }
}

#[test]
fn sample_path_statistics_match_uniform_law() {
    let mu = Measure::uniform(-1.0, 1.0).unwrap();
    let cfg = SimConfig { seed: 8, ..SimConfig::for_measure(&mu).unwrap() };
    let (paths, s) = run_ensemble(&mu, &cfg, 1500).unwrap();
    let ws: Vec<f64> = paths.iter().map(|p| p.w_t).collect();
    assert!(ks_test(&ws, &mu).1 > 0.01);
    assert!((s.mean_t - 1.0 / 3.0).abs() <= 3.0 * s.se_t + 2.0 * cfg.eps_a);
    assert!(s.max_t <= 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn compact_logconcave_paths_respect_their_bounds(seed in any::<u64>(), id in 0u64..1_000_000) {
        let mu = Measure::uniform(-1.0, 1.0).unwrap();
        let times: Vec<f64> = (1..20).map(|k| 0.02 * k as f64).collect();
        let cfg = SimConfig { seed, checkpoint_times: times.clone(), ..SimConfig::for_measure(&mu).unwrap() };
        let p = simulate_indexed(&mu, &cfg, id).unwrap();
        prop_assert!(!p.failed());
        prop_assert!(p.t_hat <= 2.0 + 2.0 * cfg.eps_a + 5.0 * cfg.dt_max);
        prop_assert!(p.extremes.max_a <= 1.0 + 1e-9);
        prop_assert!(p.extremes.max_ab <= 1.0 + 1e-6);
        for (cp, t) in p.checkpoints.iter().zip(&times) {
            prop_assert!(cp.t <= *t + 1e-12 && cp.t <= p.t_hat);
        }
        for w in p.checkpoints.windows(2) {
            prop_assert!(w[1].b >= w[0].b);
        }
    }

    #[test]
    fn grid_paths_respect_the_density_ratio_bound(seed in any::<u64>()) {
        let xs: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|x| 0.5 + 0.2 * (std::f64::consts::PI * x).cos()).collect();
        let mu = Measure::grid_normalized(xs, fs).unwrap();
        let d = mu.density_bounds().unwrap();
        let cfg = SimConfig { seed, ..SimConfig::for_measure(&mu).unwrap() };
        let p = simulate_indexed(&mu, &cfg, 0).unwrap();
        prop_assert!(p.extremes.max_ab <= d.beta / d.alpha * (1.0 + 1e-6));
        let h = mu.support_hull().half_width();
        prop_assert!(p.extremes.max_a <= h * h * (1.0 + 1e-6));
    }
}
