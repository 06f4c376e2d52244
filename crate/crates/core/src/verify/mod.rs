//! Executable checks of the flow's distributional and pathwise claims.
//!
//! Every check produces a [`CheckReport`] whose statistic and threshold are
//! pure functions of recorded path data plus the measure. Statistical
//! checks run at significance 0.01 and get one reseeded rerun in
//! [`run_suites`].

pub mod stats;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, IncrementStream, PathResult, PathState, SimConfig};
use crate::measure::Measure;
use crate::tilt::{derivatives_from, solve_c_with, tilted_measure, SolveOptions, TiltFamily, TiltParams};
pub use stats::{ks_discrete, ks_p_value, ks_statistic, ks_two_sample, mean_se, survival_table, tail_estimate, TailFit};

/// Significance level of every statistical check.
pub const ALPHA: f64 = 0.01;
/// Completed paths needed by [`check_embedding_and_mean`].
pub const MIN_PATHS: usize = 1000;
/// Slack on pathwise variance inequalities.
pub const PATHWISE_REL_TOL: f64 = 1e-6;
/// Checkpoints used by the martingale checks, as fractions of `Var[μ]`.
pub const MARTINGALE_FRACTIONS: [f64; 3] = [0.1, 0.25, 0.5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub passed: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub n_used: usize,
    pub detail: String,
}

impl CheckReport {
    fn at_most(name: impl Into<String>, statistic: f64, threshold: f64, n_used: usize, detail: impl Into<String>) -> Self {
        Self {
            check_name: name.into(),
            passed: statistic <= threshold,
            statistic,
            threshold,
            n_used,
            detail: detail.into(),
        }
    }

    fn at_least(name: impl Into<String>, statistic: f64, threshold: f64, n_used: usize, detail: impl Into<String>) -> Self {
        Self {
            check_name: name.into(),
            passed: statistic > threshold,
            statistic,
            threshold,
            n_used,
            detail: detail.into(),
        }
    }
}

/// Aggregate statistics of an ensemble over its completed paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub n_failed: usize,
    pub mean_t: f64,
    pub se_t: f64,
    pub max_t: f64,
    pub ks_stat: f64,
    pub ks_p: f64,
    pub tail_rate: Option<f64>,
    pub tail_r2: Option<f64>,
}

/// KS distance and p-value of the samples against μ. Atomic measures use
/// the discrete statistic over the atoms.
pub fn ks_test(samples: &[f64], mu: &Measure) -> (f64, f64) {
    if samples.is_empty() {
        return (1.0, 0.0);
    }
    let d = match (mu.atom_points(), mu.atom_weights()) {
        (Some(p), Some(w)) => ks_discrete(samples, p, w),
        _ => ks_statistic(samples, |x| mu.cdf(x)),
    };
    (d, ks_p_value(d, samples.len() as f64))
}

fn completed(paths: &[PathResult]) -> impl Iterator<Item = &PathResult> {
    paths.iter().filter(|p| !p.failed())
}

pub fn summarize(mu: &Measure, paths: &[PathResult]) -> Result<EnsembleSummary> {
    let ts: Vec<f64> = completed(paths).map(|p| p.t_hat).collect();
    if ts.is_empty() {
        return Err(Error::AllPathsFailed { n: paths.len() });
    }
    let ws: Vec<f64> = completed(paths).map(|p| p.w_t).collect();
    let (mean_t, se_t, _) = mean_se(&ts);
    let (ks_stat, ks_p) = ks_test(&ws, mu);
    let tail = tail_estimate(&ts).ok();
    Ok(EnsembleSummary {
        n: paths.len(),
        n_failed: paths.len() - ts.len(),
        mean_t,
        se_t,
        max_t: ts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ks_stat,
        ks_p,
        tail_rate: tail.as_ref().map(|t| t.rate),
        tail_r2: tail.as_ref().map(|t| t.r2),
    })
}

/// The embedding law (`W_T ~ μ`, by KS) and `E[T] = Var[μ]`.
pub fn check_embedding_and_mean(mu: &Measure, summary: &EnsembleSummary, eps_a: f64) -> Result<[CheckReport; 2]> {
    let used = summary.n - summary.n_failed;
    if used < MIN_PATHS {
        return Err(Error::InsufficientPaths { needed: MIN_PATHS, got: used });
    }
    let kind = if mu.is_atomic() { "discrete KS" } else { "KS" };
    let ks = CheckReport::at_least(
        "embedding_ks",
        summary.ks_p,
        ALPHA,
        used,
        format!("{kind} of W_T against mu: D = {:.5}, p = {:.4}", summary.ks_stat, summary.ks_p),
    );
    let var = mu.variance();
    let dev = (summary.mean_t - var).abs();
    let mean = CheckReport::at_most(
        "mean_stopping_time",
        dev,
        3.0 * summary.se_t + 2.0 * eps_a,
        used,
        format!("mean T_hat = {:.6} (se {:.2e}) vs Var = {:.6}", summary.mean_t, summary.se_t, var),
    );
    Ok([ks, mean])
}

/// Deterministic slack added to every martingale check, covering the
/// time-discretization error that remains when the path spread vanishes.
pub fn martingale_floor(var: f64) -> f64 {
    1e-5 * (1.0 + var)
}

/// Martingale identities at each checkpoint: `E[A + t] = Var`, `E[W] = 0`,
/// `E[F_t(x*)] = 1` at the three probes, and `E[μ_t(E)/μ(E)] = 1` over the
/// probe windows. `times` must be the checkpoint times of the ensemble.
pub fn check_martingales(var: f64, times: &[f64], paths: &[PathResult]) -> Result<Vec<CheckReport>> {
    if times.is_empty() {
        return Err(Error::MissingCheckpoints("no checkpoint times configured".into()));
    }
    let rows: Vec<&PathResult> = completed(paths).collect();
    if rows.is_empty() {
        return Err(Error::AllPathsFailed { n: paths.len() });
    }
    if let Some(p) = rows.iter().find(|p| p.checkpoints.len() != times.len()) {
        return Err(Error::MissingCheckpoints(format!(
            "path {} has {} checkpoint rows, expected {}",
            p.path_id,
            p.checkpoints.len(),
            times.len()
        )));
    }
    let floor = martingale_floor(var);
    let names = ["q10", "q50", "q90"];
    let mut out = Vec::new();
    for (k, t) in times.iter().enumerate() {
        let n = rows.len();
        let mut push = |name: String, values: Vec<f64>, target: f64, what: &str| {
            let (m, se, _) = mean_se(&values);
            out.push(CheckReport::at_most(
                name,
                (m - target).abs(),
                3.0 * se + floor,
                n,
                format!("{what}: mean {m:.6} (se {se:.2e}), expected {target}"),
            ));
        };
        let col = |f: &dyn Fn(&flow::Checkpoint) -> f64| rows.iter().map(|p| f(&p.checkpoints[k])).collect::<Vec<_>>();
        push(format!("martingale_A_plus_t@{t}"), col(&|c| c.var + c.t), var, "A + t at t^T");
        push(format!("martingale_W@{t}"), col(&|c| c.w), 0.0, "W at t^T");
        for j in 0..3 {
            push(format!("martingale_F_{}@{t}", names[j]), col(&|c| c.f[j]), 1.0, "tilted density at the probe");
            push(format!("martingale_window_{}@{t}", names[j]), col(&|c| c.e[j]), 1.0, "window mass ratio");
        }
    }
    Ok(out)
}

/// Parameters the user asserts about μ, beyond what its family implies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// μ has density `e^{-x²/2σ² - Φ}` with Φ convex.
    pub sigma: Option<f64>,
    /// Density bounds `α ≤ dμ/dx ≤ β` on the support.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// `Supp(μ) ⊆ [-L, L]`.
    pub l: Option<f64>,
}

impl Hypotheses {
    pub fn sigma_for(&self, mu: &Measure) -> Option<f64> {
        self.sigma.or_else(|| mu.gaussian_sigma())
    }

    pub fn l_for(&self, mu: &Measure) -> Option<f64> {
        self.l.or_else(|| {
            let h = mu.support_hull();
            h.is_bounded().then(|| h.lo.abs().max(h.hi.abs()))
        })
    }

    pub fn density_ratio_for(&self, mu: &Measure) -> Option<f64> {
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => Some(b / a),
            _ => mu.density_bounds().map(|d| d.beta / d.alpha),
        }
    }
}

/// Which bound [`check_bounds`] verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `T ≤ σ²` for uniformly log-concave μ.
    Unilc,
    /// `T ≤ 2L²β/α` for a density bounded between α and β on `[-L, L]`.
    CompactReg,
    /// `T ≤ 2L²` for log-concave μ on `[-L, L]`.
    CompactLc,
    /// `A_t b_t ≤ 1` along every path of a log-concave μ.
    LogconcaveAt,
    /// `A_t ≤ L²` along every path.
    CompactVar,
    /// `A_t b_t ≤ β/α` along every path.
    DensityRatioVar,
}

fn not_asserted(what: &str) -> Error {
    Error::HypothesisNotAsserted(what.to_string())
}

/// A deterministic bound over every completed path. Time bounds carry the
/// slack `tol_T = 2·eps_A + 5·dt_max`; pathwise ones a relative `1e-6`.
pub fn check_bounds(
    paths: &[PathResult],
    mu: &Measure,
    kind: BoundKind,
    hyp: &Hypotheses,
    cfg: &SimConfig,
) -> Result<CheckReport> {
    let done: Vec<&PathResult> = completed(paths).collect();
    let n = done.len();
    let tol_t = 2.0 * cfg.eps_a + 5.0 * cfg.dt_max;
    let max_t = done.iter().map(|p| p.t_hat).fold(0.0, f64::max);
    let max_ab = done.iter().map(|p| p.extremes.max_ab).fold(0.0, f64::max);
    let max_a = done.iter().map(|p| p.extremes.max_a).fold(0.0, f64::max);
    let count = |f: &dyn Fn(&PathResult) -> bool| done.iter().filter(|p| f(p)).count();
    let report = match kind {
        BoundKind::Unilc => {
            let s = hyp.sigma_for(mu).ok_or_else(|| not_asserted("unilc needs sigma"))?;
            let bound = s * s + tol_t;
            let bad = count(&|p| p.t_hat > bound);
            CheckReport::at_most("bound_T_le_sigma2", max_t, bound, n, format!("sigma = {s}, {bad} violating paths"))
        }
        BoundKind::CompactLc => {
            if !mu.is_logconcave() {
                return Err(not_asserted("compact_lc needs a log-concave measure"));
            }
            let l = hyp.l_for(mu).ok_or_else(|| not_asserted("compact_lc needs L"))?;
            let bound = 2.0 * l * l + tol_t;
            let bad = count(&|p| p.t_hat > bound);
            CheckReport::at_most("bound_T_le_2L2", max_t, bound, n, format!("L = {l}, {bad} violating paths"))
        }
        BoundKind::CompactReg => {
            let l = hyp.l_for(mu).ok_or_else(|| not_asserted("compact_reg needs L"))?;
            let r = hyp.density_ratio_for(mu).ok_or_else(|| not_asserted("compact_reg needs alpha and beta"))?;
            let bound = 2.0 * l * l * r + tol_t;
            let bad = count(&|p| p.t_hat > bound);
            CheckReport::at_most(
                "bound_T_le_2L2_beta_over_alpha",
                max_t,
                bound,
                n,
                format!("L = {l}, beta/alpha = {r:.6}, {bad} violating paths"),
            )
        }
        BoundKind::LogconcaveAt => {
            if !mu.is_logconcave() {
                return Err(not_asserted("logconcave_At needs a log-concave measure"));
            }
            let bound = 1.0 + PATHWISE_REL_TOL;
            let bad = count(&|p| p.extremes.max_ab > bound);
            CheckReport::at_most("pathwise_A_b_le_1", max_ab, bound, n, format!("{bad} violating paths"))
        }
        BoundKind::CompactVar => {
            let l = hyp.l_for(mu).ok_or_else(|| not_asserted("compact variance bound needs L"))?;
            let bound = l * l * (1.0 + PATHWISE_REL_TOL);
            let bad = count(&|p| p.extremes.max_a > bound);
            CheckReport::at_most("pathwise_A_le_L2", max_a, bound, n, format!("L = {l}, {bad} violating paths"))
        }
        BoundKind::DensityRatioVar => {
            let r = hyp.density_ratio_for(mu).ok_or_else(|| not_asserted("density ratio bound needs alpha and beta"))?;
            let bound = r * (1.0 + PATHWISE_REL_TOL);
            let bad = count(&|p| p.extremes.max_ab > bound);
            CheckReport::at_most(
                "pathwise_A_b_le_beta_over_alpha",
                max_ab,
                bound,
                n,
                format!("beta/alpha = {r:.6}, {bad} violating paths"),
            )
        }
    };
    Ok(report)
}

/// Largest skewness `|m3|/A^{3/2}` seen on any path. Reported only.
pub fn skewness_diagnostic(paths: &[PathResult]) -> CheckReport {
    let done: Vec<&PathResult> = completed(paths).collect();
    let m = done.iter().map(|p| p.extremes.max_s_ratio).fold(0.0, f64::max);
    CheckReport {
        check_name: "diagnostic_max_S_over_sqrtA".into(),
        passed: true,
        statistic: m,
        threshold: f64::INFINITY,
        n_used: done.len(),
        detail: "largest |S_t|/sqrt(A_t) over all steps; no bound asserted".into(),
    }
}

/// `(1/τ, T_hat)` pairs for a scatter plot, and a report of their correlation.
pub fn tau_diagnostic(paths: &[PathResult]) -> (CheckReport, Vec<(f64, f64)>) {
    let pts: Vec<(f64, f64)> = completed(paths).map(|p| (1.0 / p.tau_diag.max(f64::MIN_POSITIVE), p.t_hat)).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let corr = if sxx > 0.0 && syy > 0.0 { sxy / (sxx * syy).sqrt() } else { 0.0 };
    let report = CheckReport {
        check_name: "diagnostic_T_vs_inverse_tau".into(),
        passed: true,
        statistic: corr,
        threshold: f64::NAN,
        n_used: pts.len(),
        detail: "correlation of T_hat with 1/tau; no bound asserted".into(),
    };
    (report, pts)
}

/// Log-linearity and positivity of the survival curve of `T_hat`.
pub fn check_tail_form(paths: &[PathResult]) -> Result<Vec<CheckReport>> {
    let ts: Vec<f64> = completed(paths).map(|p| p.t_hat).collect();
    let fit = tail_estimate(&ts)?;
    let n = ts.len();
    Ok(vec![
        CheckReport::at_least(
            "tail_log_linear_r2",
            fit.r2,
            0.95 - f64::EPSILON,
            n,
            format!("weighted fit over {} survival points", fit.n_points),
        ),
        CheckReport::at_least("tail_rate_positive", fit.rate, 0.0, n, format!("fitted rate {:.4}", fit.rate)),
    ])
}

const EXIT_LADDER: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// First exit times of standard Brownian motion from `(lo, hi)` started at 0,
/// by direct simulation. Steps shrink from 1e-2 to 1e-6 as the path nears
/// an end: a step of size `dt` is taken only while the distance to the
/// ends exceeds `7√dt`, and the finest level is plain monitoring.
pub fn exit_time_oracle(lo: f64, hi: f64, n: usize, seed: u64) -> Vec<f64> {
    assert!(lo < 0.0 && hi > 0.0, "the interval must contain 0");
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let (mut x, mut t) = (0.0f64, 0.0f64);
            loop {
                let d = (x - lo).min(hi - x);
                let dt = EXIT_LADDER.iter().copied().find(|dt| 7.0 * dt.sqrt() < d).unwrap_or(1e-6);
                let z: f64 = rng.sample(StandardNormal);
                x += dt.sqrt() * z;
                t += dt;
                if x <= lo || x >= hi {
                    return t;
                }
            }
        })
        .collect()
}

/// Leading decay rate of the exit-time survival of `(lo, hi)` from 0.
pub fn exit_time_tail_rate(lo: f64, hi: f64) -> f64 {
    PI * PI / (2.0 * (hi - lo).powi(2))
}

/// For a two-atom μ, compares `T_hat` with an independent Brownian
/// exit-time sample and checks the fitted tail rate.
pub fn check_exit_time(mu: &Measure, paths: &[PathResult], seed: u64) -> Result<Vec<CheckReport>> {
    let pts = match mu.atom_points() {
        Some(p) if p.len() == 2 => p,
        _ => return Err(not_asserted("the exit-time oracle applies to two-atom measures")),
    };
    let (lo, hi) = (pts[0], pts[1]);
    let ts: Vec<f64> = completed(paths).map(|p| p.t_hat).collect();
    let oracle = exit_time_oracle(lo, hi, ts.len(), seed ^ 0x0e1d_7a11);
    let (d, p) = ks_two_sample(&ts, &oracle);
    let mut out = vec![CheckReport::at_least(
        "exit_time_two_sample_ks",
        p,
        ALPHA,
        ts.len(),
        format!("D = {d:.5} against {} oracle exit times", oracle.len()),
    )];
    let expected = exit_time_tail_rate(lo, hi);
    match tail_estimate(&ts) {
        Ok(fit) => out.push(CheckReport::at_most(
            "exit_time_tail_rate",
            (fit.rate / expected - 1.0).abs(),
            0.1,
            ts.len(),
            format!("fitted rate {:.4} vs {expected:.4}", fit.rate),
        )),
        Err(e) => out.push(CheckReport {
            check_name: "exit_time_tail_rate".into(),
            passed: false,
            statistic: f64::NAN,
            threshold: 0.1,
            n_used: ts.len(),
            detail: e.to_string(),
        }),
    }
    Ok(out)
}

/// Default restart time: `0.3·Var[μ]`.
pub fn default_restart_time(mu: &Measure) -> f64 {
    0.3 * mu.variance()
}

const RESTART_PILOT_ATTEMPTS: usize = 10;

/// Samples from the continuation and the restart experiment.
#[derive(Debug, Clone, Serialize)]
pub struct RestartSamples {
    pub s: f64,
    pub pilot: TiltParams,
    pub continued_t: Vec<f64>,
    pub continued_w: Vec<f64>,
    pub restarted_t: Vec<f64>,
    pub restarted_w: Vec<f64>,
}

/// Runs one pilot path to time `s`, then `n` continuations of it and `n`
/// fresh flows of the tilted measure at the pilot state.
pub fn restart_samples(mu: &Measure, s: f64, cfg: &SimConfig, n: usize) -> Result<RestartSamples> {
    let mut pilot_cfg = cfg.clone();
    pilot_cfg.checkpoint_times = vec![s];
    pilot_cfg.probes = None;
    let mut pilot = None;
    for attempt in 0..RESTART_PILOT_ATTEMPTS as u64 {
        let r = flow::simulate_indexed(mu, &pilot_cfg, u64::MAX - attempt)?;
        if !r.failed() && r.t_hat > s && r.checkpoints.first().is_some_and(|c| c.var > 0.0 && c.t == s) {
            pilot = Some(r.checkpoints[0]);
            break;
        }
    }
    let cp = pilot.ok_or(Error::PilotStoppedEarly { s, attempts: RESTART_PILOT_ATTEMPTS })?;
    let tilt = TiltParams { b: cp.b, c: cp.c };
    let mut run_cfg = cfg.clone();
    run_cfg.checkpoint_times.clear();
    run_cfg.probes = None;

    let start = PathState { w: cp.w, ..PathState::at(mu, s, tilt)? };
    let cont: Vec<PathResult> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut d = IncrementStream::new(cfg.seed ^ 0xc0_47, i);
            flow::simulate_from(mu, &run_cfg, start, i, &mut d)
        })
        .collect::<Result<_>>()?;
    let handle = tilted_measure(mu, tilt)?;
    let fresh: Vec<PathResult> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut d = IncrementStream::new(cfg.seed ^ 0x4e57, i);
            flow::simulate_path(&handle, &run_cfg, TiltParams::ZERO, &mut d)
        })
        .collect::<Result<_>>()?;
    let cont: Vec<&PathResult> = completed(&cont).collect();
    let fresh: Vec<&PathResult> = completed(&fresh).collect();
    Ok(RestartSamples {
        s,
        pilot: tilt,
        continued_t: cont.iter().map(|p| p.t_hat - s).collect(),
        continued_w: cont.iter().map(|p| p.w_t).collect(),
        restarted_t: fresh.iter().map(|p| p.t_hat).collect(),
        restarted_w: fresh.iter().map(|p| p.w_t).collect(),
    })
}

/// Markov property: `T - s` of continued paths against `T` of restarted
/// flows, and likewise `W_T`, by two-sample KS.
pub fn check_restart_consistency(mu: &Measure, s: f64, cfg: &SimConfig, n: usize) -> Result<Vec<CheckReport>> {
    let r = restart_samples(mu, s, cfg, n)?;
    let (dt, pt) = ks_two_sample(&r.continued_t, &r.restarted_t);
    let (dw, pw) = ks_two_sample(&r.continued_w, &r.restarted_w);
    let used = r.continued_t.len().min(r.restarted_t.len());
    let note = format!("pilot (b, c) = ({:.6}, {:.6}) at s = {s}", r.pilot.b, r.pilot.c);
    Ok(vec![
        CheckReport::at_least("restart_T_two_sample_ks", pt, ALPHA, used, format!("D = {dt:.5}; {note}")),
        CheckReport::at_least("restart_W_two_sample_ks", pw, ALPHA, used, format!("D = {dw:.5}; {note}")),
    ])
}

/// Grid of `(b, c)` used by the derivative checks.
pub fn default_derivative_grid() -> Vec<TiltParams> {
    let bs = [0.1, 0.5, 1.0, 2.0, 4.0];
    let cs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    bs.iter().flat_map(|&b| cs.iter().map(move |&c| TiltParams { b, c })).collect()
}

/// Step sizes of the finite differences; the order is measured between the
/// first two and the tolerance applied at the last. Steps in `a` are scaled
/// by the tilted standard deviation `√A`, so a strongly tilted measure is
/// still probed inside its quadratic regime.
pub const FD_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Relative tolerance of the derivative identities.
pub const FD_TOL: f64 = 1e-5;
/// Accepted band of measured convergence order.
pub const FD_ORDER: (f64, f64) = (1.8, 2.2);

/// One finite-difference comparison at one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct FdResult {
    pub identity: &'static str,
    pub point: TiltParams,
    pub exact: f64,
    /// `|difference quotient - exact|` at each of [`FD_STEPS`].
    pub errors: [f64; 3],
    /// `None` when the error at the middle step is within 100× of the
    /// rounding floor, so no order can be measured (the quotient is exact
    /// to working precision).
    pub order: Option<f64>,
    pub passed: bool,
}

fn fd_result(identity: &'static str, point: TiltParams, exact: f64, quotients: [f64; 3], noise: [f64; 3]) -> FdResult {
    let errors = quotients.map(|q| (q - exact).abs());
    let order = (errors[1] > 100.0 * noise[1]).then(|| (errors[0] / errors[1]).log10());
    let tol_ok = errors[2] <= FD_TOL * (1.0 + exact.abs());
    let order_ok = order.is_none_or(|p| p >= FD_ORDER.0 && p <= FD_ORDER.1);
    FdResult { identity, point, exact, errors, order, passed: tol_ok && order_ok }
}

/// Finite-difference checks of `∂a/∂c = A`, `∂c/∂a = 1/A`, `∂c/∂b = c2` and
/// `∂²c/∂a² = c11` at one point.
pub fn derivative_fd<F: TiltFamily + ?Sized>(mu: &F, p: TiltParams) -> Result<Vec<FdResult>> {
    let m = mu.tilted_moments(p)?;
    let d = derivatives_from(&m)?;
    let tight = |a: f64, b: f64| -> Result<f64> {
        let opts = SolveOptions { tol_rel: 1e-15, guess: Some(p.c + (a - m.a) / m.var), ..SolveOptions::default() };
        solve_c_with(mu, a, b, opts).map(|(c, _)| c)
    };
    let a_at = |c: f64| -> Result<f64> { Ok(mu.tilted_moments(TiltParams { b: p.b, c })?.a) };
    // Rounding floors of a and of c(a, b).
    let eps_a = 1e-15 * (1.0 + m.a.abs());
    let eps_c = eps_a / m.var;
    let mut q = [[0.0; 3]; 4];
    let mut noise = [[0.0; 3]; 4];
    let sd = m.var.sqrt();
    for (k, &h) in FD_STEPS.iter().enumerate() {
        q[0][k] = (a_at(p.c + h)? - a_at(p.c - h)?) / (2.0 * h);
        let ha = h * sd;
        let (cp, cm) = (tight(m.a + ha, p.b)?, tight(m.a - ha, p.b)?);
        q[1][k] = (cp - cm) / (2.0 * ha);
        q[2][k] = (tight(m.a, p.b + h)? - tight(m.a, p.b - h)?) / (2.0 * h);
        q[3][k] = (cp - 2.0 * tight(m.a, p.b)? + cm) / (ha * ha);
        noise[0][k] = eps_a / h;
        noise[1][k] = eps_c / ha;
        noise[2][k] = eps_c / h;
        noise[3][k] = 4.0 * eps_c / (ha * ha);
    }
    Ok(vec![
        fd_result("a2_equals_A", p, m.var, q[0], noise[0]),
        fd_result("c1_equals_inverse_A", p, d.c1, q[1], noise[1]),
        fd_result("c2", p, d.c2, q[2], noise[2]),
        fd_result("c11", p, d.c11, q[3], noise[3]),
    ])
}

/// Runs [`derivative_fd`] over a grid and folds the results into one report
/// per identity. The statistic is the largest error relative to
/// `1 + |exact|` at the finest step.
pub fn check_derivative_identities<F: TiltFamily + ?Sized>(mu: &F, grid: &[TiltParams]) -> Result<Vec<CheckReport>> {
    if grid.iter().any(|p| p.b - FD_STEPS[0] < 0.0) {
        return Err(Error::InvalidConfig("derivative grid needs b ≥ 0.01".into()));
    }
    let results: Vec<FdResult> = grid.iter().map(|p| derivative_fd(mu, *p)).collect::<Result<Vec<_>>>()?.concat();
    let identities = ["a2_equals_A", "c1_equals_inverse_A", "c2", "c11"];
    Ok(identities
        .iter()
        .map(|id| {
            let rs: Vec<&FdResult> = results.iter().filter(|r| r.identity == *id).collect();
            let worst = rs.iter().map(|r| r.errors[2] / (1.0 + r.exact.abs())).fold(0.0, f64::max);
            let orders: Vec<f64> = rs.iter().filter_map(|r| r.order).collect();
            let (omin, omax) = orders.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), o| (a.min(*o), b.max(*o)));
            let failures: Vec<String> = rs
                .iter()
                .filter(|r| !r.passed)
                .map(|r| format!("(b={}, c={}): err {:.2e}, order {:?}", r.point.b, r.point.c, r.errors[2], r.order))
                .collect();
            let detail = format!(
                "orders measured at {}/{} points, range [{:.3}, {:.3}]{}",
                orders.len(),
                rs.len(),
                omin,
                omax,
                if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join("; ")) }
            );
            CheckReport {
                check_name: format!("derivative_{id}"),
                passed: failures.is_empty(),
                statistic: worst,
                threshold: FD_TOL,
                n_used: rs.len(),
                detail,
            }
        })
        .collect())
}

/// Check groups selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Mainthm,
    Logconcave,
    Unilc,
    Compact,
    Restart,
    Derivatives,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mainthm" => Suite::Mainthm,
            "logconcave" => Suite::Logconcave,
            "unilc" => Suite::Unilc,
            "compact" => Suite::Compact,
            "restart" => Suite::Restart,
            "derivatives" => Suite::Derivatives,
            "all" => Suite::All,
            other => return Err(Error::InvalidConfig(format!("unknown suite {other:?}"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub paths: usize,
    /// Base configuration; suites set their own checkpoints.
    pub config: SimConfig,
    pub hyp: Hypotheses,
    pub restart_s: Option<f64>,
}

/// Seed offset of the one reseeded rerun.
const RESEED: u64 = 0x5eed_0000_0000_0001;

fn ensemble_reports(mu: &Measure, suites: &[Suite], opts: &SuiteOptions, cfg: &SimConfig) -> Result<Vec<CheckReport>> {
    let paths = flow::simulate_paths(mu, cfg, 0..opts.paths as u64)?;
    let summary = summarize(mu, &paths)?;
    let has = |s: Suite| suites.contains(&s) || suites.contains(&Suite::All);
    let all = suites.contains(&Suite::All);
    let mut out = Vec::new();
    if has(Suite::Mainthm) {
        out.extend(check_embedding_and_mean(mu, &summary, cfg.eps_a)?);
        out.extend(check_martingales(mu.variance(), &cfg.checkpoint_times, &paths)?);
        if mu.atom_points().is_some_and(|p| p.len() == 2) {
            out.extend(check_exit_time(mu, &paths, cfg.seed)?);
        }
    }
    if has(Suite::Logconcave) && (!all || mu.is_logconcave()) {
        out.push(check_bounds(&paths, mu, BoundKind::LogconcaveAt, &opts.hyp, cfg)?);
        out.push(skewness_diagnostic(&paths));
        out.push(tau_diagnostic(&paths).0);
        if paths.len() >= stats::TAIL_MIN_SAMPLES {
            out.extend(check_tail_form(&paths)?);
        }
    }
    if has(Suite::Unilc) && (!all || opts.hyp.sigma_for(mu).is_some()) {
        out.push(check_bounds(&paths, mu, BoundKind::Unilc, &opts.hyp, cfg)?);
    }
    if has(Suite::Compact) && (!all || opts.hyp.l_for(mu).is_some()) {
        out.push(check_bounds(&paths, mu, BoundKind::CompactVar, &opts.hyp, cfg)?);
        let lc = mu.is_logconcave();
        let reg = opts.hyp.density_ratio_for(mu).is_some();
        if !lc && !reg {
            return Err(not_asserted("compact needs a log-concave measure or density bounds"));
        }
        if lc {
            out.push(check_bounds(&paths, mu, BoundKind::CompactLc, &opts.hyp, cfg)?);
        }
        if reg {
            out.push(check_bounds(&paths, mu, BoundKind::CompactReg, &opts.hyp, cfg)?);
            out.push(check_bounds(&paths, mu, BoundKind::DensityRatioVar, &opts.hyp, cfg)?);
        }
    }
    Ok(out)
}

/// Deterministic bounds must hold on every path of every run; only the
/// remaining checks are statistical.
fn is_statistical(name: &str) -> bool {
    !(name.starts_with("bound_") || name.starts_with("pathwise_"))
}

/// Replace failed statistical reports of `first` by their counterparts from
/// a rerun.
fn merge_retry(first: Vec<CheckReport>, rerun: impl FnOnce() -> Result<Vec<CheckReport>>) -> Result<Vec<CheckReport>> {
    if first.iter().all(|r| r.passed || !is_statistical(&r.check_name)) {
        return Ok(first);
    }
    let second = rerun()?;
    Ok(first
        .into_iter()
        .map(|r| {
            if r.passed || !is_statistical(&r.check_name) {
                return r;
            }
            match second.iter().find(|s| s.check_name == r.check_name) {
                Some(s) => CheckReport {
                    detail: format!("{} [reseeded rerun; first run: statistic {:.6e}]", s.detail, r.statistic),
                    ..s.clone()
                },
                None => r,
            }
        })
        .collect())
}

/// Runs the selected suites. Simulation-based checks share one ensemble;
/// failed statistical checks are rerun once with a fresh seed.
pub fn run_suites(mu: &Measure, suites: &[Suite], opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let has = |s: Suite| suites.contains(&s) || suites.contains(&Suite::All);
    let mut out = Vec::new();
    let needs_ensemble = [Suite::Mainthm, Suite::Logconcave, Suite::Unilc, Suite::Compact].into_iter().any(has);
    if needs_ensemble {
        if mu.is_dirac() {
            return Err(Error::InvalidConfig("a Dirac measure has nothing to simulate".into()));
        }
        let mut cfg = opts.config.clone();
        cfg.checkpoint_times = MARTINGALE_FRACTIONS.iter().map(|f| f * mu.variance()).collect();
        let first = ensemble_reports(mu, suites, opts, &cfg)?;
        let reseeded = SimConfig { seed: cfg.seed ^ RESEED, ..cfg.clone() };
        out.extend(merge_retry(first, || ensemble_reports(mu, suites, opts, &reseeded))?);
    }
    if has(Suite::Restart) {
        let s = opts.restart_s.unwrap_or_else(|| default_restart_time(mu));
        let n = opts.paths;
        let first = check_restart_consistency(mu, s, &opts.config, n)?;
        let reseeded = SimConfig { seed: opts.config.seed ^ RESEED, ..opts.config.clone() };
        out.extend(merge_retry(first, || check_restart_consistency(mu, s, &reseeded, n))?);
    }
    if has(Suite::Derivatives) {
        out.extend(check_derivative_identities(mu, &default_derivative_grid())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_against_standard_normal() {
        let mu = Measure::gaussian(1.0).unwrap();
        let (d, _) = ks_test(&vec![0.0; 1000], &mu);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exit_oracle_has_unit_mean_on_symmetric_interval() {
        let ts = exit_time_oracle(-1.0, 1.0, 4000, 3);
        let (m, se, _) = mean_se(&ts);
        assert!((m - 1.0).abs() < 3.0 * se + 2e-3, "{m} ± {se}");
    }
}
