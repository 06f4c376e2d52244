//! The measure-valued flow `(b_t, c_t)` driven by a Brownian path, run to
//! the time its tilted variance collapses.
//!
//! Two discretizations are provided. [`Scheme::RootDriven`] moves `W` and
//! `b` and recovers `c` by inverting the mean map, so the tilted mean equals
//! `W` at every step. [`Scheme::Euler`] integrates the `(b, c)` system
//! literally and is kept as an independent cross-check.

mod brownian;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use brownian::{BrownianDriver, IncrementStream, SharedPath};

use crate::error::{Error, Result};
use crate::measure::{Hull, Measure};
use crate::tilt::{solve_c_with, SolveOptions, TiltFamily, TiltParams, TiltedMoments};
use crate::verify::{self, EnsembleSummary};

/// Smallest step the adaptive rule may take.
pub const DT_MIN: f64 = 1e-12;
/// Consecutive minimum-size steps after which a path is declared stalled.
pub const MAX_MIN_STEPS: usize = 1_000_000;
/// Levels of the quantile probes.
pub const PROBE_LEVELS: [f64; 3] = [0.1, 0.5, 0.9];
/// Half-width (in probability) of the windows around each probe quantile.
pub const PROBE_WINDOW: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    /// Root-driven: `c` solved from `a(b, c) = W`.
    #[default]
    #[serde(rename = "a")]
    RootDriven,
    /// Literal Euler–Maruyama on `dc = dW/A + a dt/A²`, `db = dt/A²`.
    #[serde(rename = "b")]
    Euler,
}

/// Integrator of `db/dt = A⁻²` inside the root-driven scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BIntegrator {
    /// Explicit Euler, refined by one midpoint evaluation when the step
    /// moves `b` by more than 10% of `b + 1/A`.
    Euler,
    /// Predictor at the new `W`, then the trapezoid average of `A⁻²`.
    Trapezoid,
    /// Heun's third-order Runge–Kutta, stages taken with `W` interpolated
    /// linearly across the step.
    #[default]
    Rk3,
}

/// Points and windows at which the tilted density is tracked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probes {
    pub points: [f64; 3],
    pub windows: [(f64, f64); 3],
    /// `μ(window)`, the normalizer of the window martingales.
    pub window_mass: [f64; 3],
}

impl Probes {
    /// The 10/50/90% quantiles of μ, with windows spanning ±1% of probability
    /// around each (for atoms, the atom itself).
    pub fn quantiles(mu: &Measure) -> Result<Self> {
        let mut points = [0.0; 3];
        let mut windows = [(0.0, 0.0); 3];
        let mut window_mass = [0.0; 3];
        for (k, p) in PROBE_LEVELS.iter().enumerate() {
            let x = mu.quantile(*p);
            let w = if mu.is_atomic() {
                (x, x)
            } else {
                (mu.quantile(p - PROBE_WINDOW), mu.quantile(p + PROBE_WINDOW))
            };
            points[k] = x;
            windows[k] = w;
            window_mass[k] = mu.tilted_mass(TiltParams::ZERO, w.0, w.1)?;
        }
        Ok(Self { points, windows, window_mass })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt_max: f64,
    /// Target relative change of `A` per step.
    pub eta: f64,
    /// Paths stop once `A ≤ eps_a`.
    pub eps_a: f64,
    /// Hard time cap; paths reaching it count as failed.
    pub t_max: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub integrator: BIntegrator,
    pub checkpoint_times: Vec<f64>,
    pub probes: Option<Probes>,
}

impl SimConfig {
    /// Defaults scaled to μ: `eps_a = 1e-6·Var`, `t_max = 50·Var`, quantile probes.
    pub fn for_measure(mu: &Measure) -> Result<Self> {
        let var = mu.variance();
        Ok(Self {
            dt_max: 1e-3,
            eta: 0.05,
            eps_a: (1e-6 * var).max(f64::MIN_POSITIVE),
            t_max: (50.0 * var).max(DT_MIN),
            seed: 0,
            scheme: Scheme::RootDriven,
            integrator: BIntegrator::default(),
            checkpoint_times: Vec::new(),
            probes: if mu.is_dirac() { None } else { Some(Probes::quantiles(mu)?) },
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return bad("dt_max must be positive");
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad("eta must lie in (0, 1)");
        }
        if !(self.eps_a > 0.0 && self.eps_a.is_finite()) {
            return bad("eps_a must be positive");
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad("t_max must be positive");
        }
        if self.checkpoint_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("checkpoint times must be finite and nonnegative");
        }
        if self.checkpoint_times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("checkpoint times must be strictly increasing");
        }
        Ok(())
    }
}

/// The running state of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathState {
    pub t: f64,
    pub w: f64,
    pub tilt: TiltParams,
    pub a: f64,
    #[serde(rename = "A")]
    pub var: f64,
    pub m3: f64,
    pub log_v: f64,
}

impl PathState {
    /// State at time `t` with the given tilt, its mean taken as `W`.
    pub fn at<F: TiltFamily + ?Sized>(mu: &F, t: f64, tilt: TiltParams) -> Result<Self> {
        let m = mu.tilted_moments(tilt)?;
        Ok(Self::from_moments(t, m.a, tilt, &m))
    }

    fn from_moments(t: f64, w: f64, tilt: TiltParams, m: &TiltedMoments) -> Self {
        Self { t, w, tilt, a: m.a, var: m.var, m3: m.m3, log_v: m.log_v }
    }

    fn moments(&self) -> TiltedMoments {
        TiltedMoments { log_v: self.log_v, a: self.a, var: self.var, m3: self.m3 }
    }

    /// Density of the current tilted measure relative to the family.
    pub fn density(&self, x: f64) -> f64 {
        (self.tilt.log_tilt(x) - self.log_v).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    #[serde(rename = "A_below_eps")]
    AVarBelowEps,
    #[serde(rename = "target_hull_endpoint")]
    HullEndpoint,
    #[serde(rename = "t_max_reached")]
    TimeLimit,
    #[serde(rename = "numerical_breakdown")]
    Breakdown,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::AVarBelowEps => "A_below_eps",
            StopReason::HullEndpoint => "target_hull_endpoint",
            StopReason::TimeLimit => "t_max_reached",
            StopReason::Breakdown => "numerical_breakdown",
        }
    }

    /// Failed paths are excluded from statistics.
    pub fn is_failure(self) -> bool {
        matches!(self, StopReason::TimeLimit | StopReason::Breakdown)
    }
}

impl std::str::FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [StopReason::AVarBelowEps, StopReason::HullEndpoint, StopReason::TimeLimit, StopReason::Breakdown]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::MalformedSpec(format!("unknown stop reason {s:?}")))
    }
}

/// State recorded at a checkpoint time. After the path has stopped, rows
/// carry `t = T_hat`, `w = W_T`, `A = 0`, `S = 0` and the probe values of the
/// stopped state (their limits when the path left through a hull endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    pub w: f64,
    pub b: f64,
    pub c: f64,
    pub a: f64,
    #[serde(rename = "A")]
    pub var: f64,
    /// `m3 / A`.
    #[serde(rename = "S")]
    pub s: f64,
    /// Tilted density at the probe points.
    pub f: [f64; 3],
    /// Tilted mass of the probe windows over their untilted mass.
    pub e: [f64; 3],
}

/// Pathwise maxima over every accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct PathExtremes {
    /// `max A·b`.
    pub max_ab: f64,
    pub max_a: f64,
    /// `max |m3| / A^{3/2}`.
    pub max_s_ratio: f64,
    /// `max |a - w|`; zero for the root-driven scheme up to solver tolerance.
    pub max_gap: f64,
}

impl PathExtremes {
    fn update(&mut self, s: &PathState) {
        self.max_ab = self.max_ab.max(s.var * s.tilt.b);
        self.max_a = self.max_a.max(s.var);
        if s.var > 0.0 {
            self.max_s_ratio = self.max_s_ratio.max(s.m3.abs() / s.var.powf(1.5));
        }
        self.max_gap = self.max_gap.max((s.a - s.w).abs());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathResult {
    pub path_id: u64,
    pub t_hat: f64,
    pub w_t: f64,
    pub n_steps: u64,
    pub stop_reason: StopReason,
    /// First time with `A ≥ 2`, capped at 1.
    pub tau_diag: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub extremes: PathExtremes,
}

impl PathResult {
    pub fn failed(&self) -> bool {
        self.stop_reason.is_failure()
    }
}

/// Result of one step: a new state, or the path left the support hull.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Advance {
    Moved(PathState),
    Exited { end: f64 },
}

fn newton_guess(s: &PathState, dw: f64, db: f64) -> f64 {
    // c(w, b) to second order in dw and first in db.
    let c1 = 1.0 / s.var;
    let c2 = (s.m3 + 2.0 * s.a * s.var) / (2.0 * s.var);
    let c11 = -s.m3 / (s.var * s.var * s.var);
    let g = s.tilt.c + c1 * dw + c2 * db + 0.5 * c11 * dw * dw;
    if g.is_finite() {
        g
    } else {
        s.tilt.c
    }
}

fn solve_at<F: TiltFamily + ?Sized>(mu: &F, w: f64, b: f64, guess: f64) -> Result<(f64, TiltedMoments)> {
    solve_c_with(mu, w, b, SolveOptions { guess: Some(guess), ..SolveOptions::default() })
}

fn positive_var(m: &TiltedMoments) -> Result<f64> {
    if m.var > 0.0 {
        Ok(m.var)
    } else {
        Err(Error::DegenerateTilt { var: m.var })
    }
}

fn step_root<F: TiltFamily + ?Sized>(mu: &F, s: &PathState, dw: f64, dt: f64, integ: BIntegrator) -> Result<PathState> {
    let w1 = s.w + dw;
    let hull = mu.support_hull();
    if !hull.contains_open(w1) {
        return Err(Error::TargetOutsideHull { target: w1, lo: hull.lo, hi: hull.hi });
    }
    let var = positive_var(&s.moments())?;
    let rate = 1.0 / (var * var);
    let db = dt * rate;
    let b_new = match integ {
        BIntegrator::Euler if db <= 0.1 * (s.tilt.b + 1.0 / var) => s.tilt.b + db,
        BIntegrator::Euler => {
            let wm = s.w + 0.5 * dw;
            let bm = s.tilt.b + 0.5 * db;
            let (_, mm) = solve_at(mu, wm, bm, newton_guess(s, 0.5 * dw, 0.5 * db))?;
            let vm = positive_var(&mm)?;
            s.tilt.b + dt / (vm * vm)
        }
        BIntegrator::Trapezoid => {
            let b1 = s.tilt.b + db;
            let (_, m1) = solve_at(mu, w1, b1, newton_guess(s, dw, db))?;
            let v1 = positive_var(&m1)?;
            s.tilt.b + 0.5 * dt * (rate + 1.0 / (v1 * v1))
        }
        BIntegrator::Rk3 => {
            let (b2, w2) = (s.tilt.b + dt / 3.0 * rate, s.w + dw / 3.0);
            let (_, m2) = solve_at(mu, w2, b2, newton_guess(s, dw / 3.0, b2 - s.tilt.b))?;
            let v2 = positive_var(&m2)?;
            let (b3, w3) = (s.tilt.b + 2.0 * dt / 3.0 / (v2 * v2), s.w + 2.0 * dw / 3.0);
            let (_, m3) = solve_at(mu, w3, b3, newton_guess(s, 2.0 * dw / 3.0, b3 - s.tilt.b))?;
            let v3 = positive_var(&m3)?;
            s.tilt.b + 0.25 * dt * (rate + 3.0 / (v3 * v3))
        }
    };
    let (c, m) = solve_at(mu, w1, b_new, newton_guess(s, dw, b_new - s.tilt.b))?;
    Ok(PathState::from_moments(s.t + dt, w1, TiltParams { b: b_new, c }, &m))
}

fn step_euler<F: TiltFamily + ?Sized>(mu: &F, s: &PathState, dw: f64, dt: f64) -> Result<PathState> {
    let var = positive_var(&s.moments())?;
    let rate = dt / (var * var);
    let tilt = TiltParams { b: s.tilt.b + rate, c: s.tilt.c + dw / var + s.a * rate };
    let m = mu.tilted_moments(tilt)?;
    Ok(PathState::from_moments(s.t + dt, s.w + dw, tilt, &m))
}

/// One step of the chosen scheme; the root-driven scheme uses explicit
/// Euler for `b` (with midpoint refinement on large moves).
pub fn step<F: TiltFamily + ?Sized>(mu: &F, s: &PathState, dw: f64, dt: f64, scheme: Scheme) -> Result<PathState> {
    step_with(mu, s, dw, dt, scheme, BIntegrator::Euler)
}

/// [`step`] with an explicit integrator for `b` in the root-driven scheme.
pub fn step_with<F: TiltFamily + ?Sized>(
    mu: &F,
    s: &PathState,
    dw: f64,
    dt: f64,
    scheme: Scheme,
    integ: BIntegrator,
) -> Result<PathState> {
    if dt == 0.0 && dw == 0.0 {
        return Ok(*s);
    }
    match scheme {
        Scheme::RootDriven => step_root(mu, s, dw, dt, integ),
        Scheme::Euler => step_euler(mu, s, dw, dt),
    }
}

/// Probability that a Brownian bridge from `w0` to `w1` over `dt` touches
/// a finite end of the hull, split by end.
fn crossing_probabilities(hull: &Hull, w0: f64, w1: f64, dt: f64) -> (f64, f64) {
    let p = |end: f64| {
        if end.is_finite() {
            (-2.0 * (w0 - end).abs() * (w1 - end).abs() / dt).exp()
        } else {
            0.0
        }
    };
    (p(hull.lo), p(hull.hi))
}

fn advance<F: TiltFamily + ?Sized>(
    mu: &F,
    s: &PathState,
    cfg: &SimConfig,
    dt: f64,
    driver: &mut dyn BrownianDriver,
) -> Result<Advance> {
    let dw = driver.increment(s.t, dt);
    match cfg.scheme {
        Scheme::Euler => step_euler(mu, s, dw, dt).map(Advance::Moved),
        Scheme::RootDriven => {
            let hull = mu.support_hull();
            let w1 = s.w + dw;
            if !hull.contains_open(w1) {
                return Ok(Advance::Exited { end: hull.nearest_end(w1) });
            }
            if hull.lo.is_finite() || hull.hi.is_finite() {
                let (plo, phi) = crossing_probabilities(&hull, s.w, w1, dt);
                let u = driver.uniform();
                if u < plo {
                    return Ok(Advance::Exited { end: hull.lo });
                }
                if u < plo + phi {
                    return Ok(Advance::Exited { end: hull.hi });
                }
            }
            match step_root(mu, s, dw, dt, cfg.integrator) {
                Ok(next) => Ok(Advance::Moved(next)),
                // The root finder only fails this close to an end of the hull.
                Err(Error::NoConvergence { .. })
                    if hull.is_bounded() && (w1 - hull.nearest_end(w1)).abs() <= 1e-9 * (hull.hi - hull.lo) =>
                {
                    Ok(Advance::Exited { end: hull.nearest_end(w1) })
                }
                Err(e) => Err(e),
            }
        }
    }
}

struct Recorder<'a> {
    times: &'a [f64],
    probes: Option<&'a Probes>,
    next: usize,
    rows: Vec<Checkpoint>,
    last_f: [f64; 3],
    last_e: [f64; 3],
}

impl<'a> Recorder<'a> {
    fn new(times: &'a [f64], probes: Option<&'a Probes>) -> Self {
        Self { times, probes, next: 0, rows: Vec::with_capacity(times.len()), last_f: [1.0; 3], last_e: [1.0; 3] }
    }

    fn next_time(&self) -> Option<f64> {
        self.times.get(self.next).copied()
    }

    fn probe_values<F: TiltFamily + ?Sized>(&mut self, mu: &F, s: &PathState) -> Result<()> {
        if let Some(p) = self.probes {
            for k in 0..3 {
                self.last_f[k] = s.density(p.points[k]);
                let (lo, hi) = p.windows[k];
                self.last_e[k] = mu.tilted_mass(s.tilt, lo, hi)? / p.window_mass[k];
            }
        }
        Ok(())
    }

    /// Record every checkpoint at or before `s.t`.
    fn record_running<F: TiltFamily + ?Sized>(&mut self, mu: &F, s: &PathState) -> Result<()> {
        while let Some(t) = self.next_time() {
            if t > s.t {
                break;
            }
            self.probe_values(mu, s)?;
            self.rows.push(Checkpoint {
                t: s.t,
                w: s.w,
                b: s.tilt.b,
                c: s.tilt.c,
                a: s.a,
                var: s.var,
                s: if s.var > 0.0 { s.m3 / s.var } else { 0.0 },
                f: self.last_f,
                e: self.last_e,
            });
            self.next += 1;
        }
        Ok(())
    }

    /// Fill the remaining checkpoints with the stopped state.
    fn finish(mut self, last: &PathState, t_hat: f64, w_t: f64, exited: bool) -> Vec<Checkpoint> {
        if exited {
            if let Some(p) = self.probes {
                for k in 0..3 {
                    let (lo, hi) = p.windows[k];
                    self.last_e[k] = if w_t >= lo && w_t <= hi { 1.0 / p.window_mass[k] } else { 0.0 };
                    // The limit of the density ratio at a non-atom point once
                    // the measure has collapsed onto an endpoint.
                    self.last_f[k] = if lo == hi { self.last_e[k] } else { 0.0 };
                }
            }
        }
        while self.next < self.times.len() {
            self.rows.push(Checkpoint {
                t: t_hat,
                w: w_t,
                b: last.tilt.b,
                c: last.tilt.c,
                a: last.a,
                var: 0.0,
                s: 0.0,
                f: self.last_f,
                e: self.last_e,
            });
            self.next += 1;
        }
        self.rows
    }
}

/// Simulate one path of the flow for `mu` tilted by `init`, starting at
/// `t = 0` with `W` at the tilted mean.
pub fn simulate_path<F: TiltFamily + ?Sized>(
    mu: &F,
    cfg: &SimConfig,
    init: TiltParams,
    driver: &mut dyn BrownianDriver,
) -> Result<PathResult> {
    let start = PathState::at(mu, 0.0, init)?;
    simulate_from(mu, cfg, start, 0, driver)
}

/// Continue a path from an arbitrary state until it stops.
pub fn simulate_from<F: TiltFamily + ?Sized>(
    mu: &F,
    cfg: &SimConfig,
    start: PathState,
    path_id: u64,
    driver: &mut dyn BrownianDriver,
) -> Result<PathResult> {
    cfg.validate()?;
    let mut rec = Recorder::new(&cfg.checkpoint_times, cfg.probes.as_ref());
    while rec.next_time().is_some_and(|t| t < start.t) {
        rec.next += 1;
    }
    let mut s = start;
    let mut extremes = PathExtremes::default();
    extremes.update(&s);
    let mut tau = if s.var >= 2.0 { Some(s.t) } else { None };
    let mut n_steps = 0u64;
    let mut min_steps = 0usize;
    rec.record_running(mu, &s)?;

    let (t_hat, w_t, reason, exited) = loop {
        if s.var <= cfg.eps_a {
            break (s.t + s.var, s.w, StopReason::AVarBelowEps, false);
        }
        if s.t >= cfg.t_max {
            break (s.t, s.w, StopReason::TimeLimit, false);
        }
        let mut dt = (cfg.eta * s.var).clamp(DT_MIN, cfg.dt_max);
        let mut land = None;
        if let Some(tc) = rec.next_time() {
            if tc - s.t <= dt {
                dt = tc - s.t;
                land = Some(tc);
            }
        }
        if cfg.t_max - s.t <= dt {
            dt = cfg.t_max - s.t;
            land = Some(cfg.t_max);
        }
        if dt <= DT_MIN {
            min_steps += 1;
            if min_steps > MAX_MIN_STEPS {
                break (s.t, s.w, StopReason::Breakdown, false);
            }
        } else {
            min_steps = 0;
        }
        n_steps += 1;
        match advance(mu, &s, cfg, dt, driver) {
            Ok(Advance::Moved(mut next)) => {
                if let Some(t) = land {
                    next.t = t;
                }
                s = next;
                extremes.update(&s);
                if tau.is_none() && s.var >= 2.0 {
                    tau = Some(s.t);
                }
                rec.record_running(mu, &s)?;
            }
            Ok(Advance::Exited { end }) => break (s.t + dt, end, StopReason::HullEndpoint, true),
            Err(_) => break (s.t, s.w, StopReason::Breakdown, false),
        }
    };
    if !exited {
        // Probes at the final state, so stopped rows carry its values.
        rec.probe_values(mu, &s)?;
    }
    Ok(PathResult {
        path_id,
        t_hat,
        w_t,
        n_steps,
        stop_reason: reason,
        tau_diag: tau.unwrap_or(1.0).min(1.0),
        checkpoints: rec.finish(&s, t_hat, w_t, exited),
        extremes,
    })
}

fn dirac_result(mu: &Measure, cfg: &SimConfig, path_id: u64) -> PathResult {
    let x = mu.atom_points().and_then(|p| p.first().copied()).unwrap_or(0.0);
    let rows = cfg
        .checkpoint_times
        .iter()
        .map(|_| Checkpoint { t: 0.0, w: x, b: 0.0, c: 0.0, a: x, var: 0.0, s: 0.0, f: [1.0; 3], e: [1.0; 3] })
        .collect();
    PathResult {
        path_id,
        t_hat: 0.0,
        w_t: x,
        n_steps: 0,
        stop_reason: StopReason::AVarBelowEps,
        tau_diag: 1.0,
        checkpoints: rows,
        extremes: PathExtremes::default(),
    }
}

/// Simulate path `path_id` of an ensemble, with increments from the stream
/// `(cfg.seed, path_id)`.
pub fn simulate_indexed(mu: &Measure, cfg: &SimConfig, path_id: u64) -> Result<PathResult> {
    if mu.is_dirac() {
        return Ok(dirac_result(mu, cfg, path_id));
    }
    let mut driver = IncrementStream::new(cfg.seed, path_id);
    let mut r = simulate_path(mu, cfg, TiltParams::ZERO, &mut driver)?;
    r.path_id = path_id;
    Ok(r)
}

/// Paths `0..n_paths` (in order) without aggregation.
pub fn simulate_paths(mu: &Measure, cfg: &SimConfig, ids: std::ops::Range<u64>) -> Result<Vec<PathResult>> {
    cfg.validate()?;
    ids.into_par_iter().map(|i| simulate_indexed(mu, cfg, i)).collect()
}

/// Simulate `n_paths` independent paths (in parallel, results in path order)
/// and summarize them.
pub fn run_ensemble(mu: &Measure, cfg: &SimConfig, n_paths: usize) -> Result<(Vec<PathResult>, EnsembleSummary)> {
    if n_paths == 0 {
        return Err(Error::InvalidConfig("n_paths must be at least 1".into()));
    }
    let paths = simulate_paths(mu, cfg, 0..n_paths as u64)?;
    let summary = verify::summarize(mu, &paths)?;
    Ok((paths, summary))
}
