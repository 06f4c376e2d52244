//! Gaussian tilts `e^{cx - bx²/2}` of a measure and their functionals.
//!
//! For a measure μ and [`TiltParams`] `(b, c)` the tilted measure is
//! `V⁻¹ e^{cx - bx²/2} μ(dx)` with normalizer `V`. [`TiltedMoments`] carries
//! `log V`, its mean `a`, variance `A` and third central moment `m3`.
//!
//! Gaussian and atomic measures use exact formulas. Uniform, Laplace and
//! grid densities go through the closed-form segment engine in
//! [`segment`]; an adaptive Gauss–Kronrod route ([`Engine::Quadrature`]) is
//! kept as an independent check. Everything is evaluated relative to the
//! largest exponent, so `c` and `b` may grow without bound.

mod quadrature;
pub(crate) mod segment;

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;
use libm::erfc;

use crate::error::{Error, Result};
use crate::measure::{Family, Hull, Measure};
use segment::{Segment, TiltSums};

/// Default relative tolerance of [`solve_c`], scaled by `1 + |a|`.
pub const TOL_A: f64 = 1e-10;
/// Iteration cap of the root finder.
pub const MAX_SOLVE_ITER: usize = 200;

/// The pair `(b, c)` of the tilt `e^{cx - bx²/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TiltParams {
    pub b: f64,
    pub c: f64,
}

impl TiltParams {
    pub const ZERO: TiltParams = TiltParams { b: 0.0, c: 0.0 };

    pub fn new(b: f64, c: f64) -> Result<Self> {
        if !(b.is_finite() && b >= 0.0 && c.is_finite()) {
            return Err(Error::TiltNotIntegrable { b, c });
        }
        Ok(Self { b, c })
    }

    /// Tilting by `self` and then by `other` is tilting by the sum.
    pub fn compose(self, other: TiltParams) -> TiltParams {
        TiltParams { b: self.b + other.b, c: self.c + other.c }
    }

    pub fn log_tilt(self, x: f64) -> f64 {
        self.c * x - 0.5 * self.b * x * x
    }
}

/// Normalizer (as `log V`), mean, variance and third central moment of a
/// tilted measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltedMoments {
    pub log_v: f64,
    pub a: f64,
    #[serde(rename = "A")]
    pub var: f64,
    pub m3: f64,
}

impl TiltedMoments {
    pub fn v(&self) -> f64 {
        self.log_v.exp()
    }
}

/// Partial derivatives of the mean map `a(b, c)` and of its inverse `c(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltDerivatives {
    /// ∂a/∂b
    pub a1: f64,
    /// ∂a/∂c, equal to the tilted variance
    pub a2: f64,
    /// ∂c/∂a
    pub c1: f64,
    /// ∂c/∂b
    pub c2: f64,
    /// ∂²c/∂a²
    pub c11: f64,
}

/// How tilted integrals of continuous measures are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Exact formulas where available, closed-form segment integrals otherwise.
    #[default]
    Auto,
    /// Adaptive Gauss–Kronrod for densities; plain (non log-domain) sums
    /// for atoms. Slow; meant for cross-checking.
    Quadrature,
}

/// Anything that can be tilted: a [`Measure`] or a [`TiltedMeasure`].
pub trait TiltFamily: Send + Sync {
    fn tilted_moments(&self, p: TiltParams) -> Result<TiltedMoments>;

    /// Open interval of `c` for which the tilt with this `b` is integrable.
    fn c_domain(&self, b: f64) -> (f64, f64);

    fn support_hull(&self) -> Hull;

    /// Probability that the tilted measure gives to the closed interval `[lo, hi]`.
    fn tilted_mass(&self, p: TiltParams, lo: f64, hi: f64) -> Result<f64>;

    /// Density of the tilted measure with respect to the untilted one.
    fn tilted_density(&self, p: TiltParams, x: f64) -> Result<f64> {
        let m = self.tilted_moments(p)?;
        Ok((p.log_tilt(x) - m.log_v).exp())
    }
}

pub(crate) fn segments_of(family: &Family) -> Vec<Segment> {
    match family {
        Family::Uniform { lo, hi } => {
            let f = 1.0 / (hi - lo);
            vec![Segment { x0: *lo, x1: *hi, f0: f, f1: f, shift: 0.0 }]
        }
        Family::Laplace { scale } => {
            let f = 0.5 / scale;
            vec![
                Segment { x0: f64::NEG_INFINITY, x1: 0.0, f0: f, f1: f, shift: 1.0 / scale },
                Segment { x0: 0.0, x1: f64::INFINITY, f0: f, f1: f, shift: -1.0 / scale },
            ]
        }
        Family::Grid(g) => g
            .xs
            .windows(2)
            .zip(g.fs.windows(2))
            .filter(|(_, f)| f[0] > 0.0 || f[1] > 0.0)
            .map(|(x, f)| Segment { x0: x[0], x1: x[1], f0: f[0], f1: f[1], shift: 0.0 })
            .collect(),
        Family::Gaussian { .. } | Family::Atoms(_) => Vec::new(),
    }
}

fn from_sums(s: &TiltSums, p: TiltParams) -> Result<TiltedMoments> {
    let n0 = s.n[0];
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::TiltNotIntegrable { b: p.b, c: p.c });
    }
    let d = s.n[1] / n0;
    let m2 = s.n[2] / n0;
    let var = (m2 - d * d).max(0.0);
    let m3 = s.n[3] / n0 - 3.0 * d * m2 + 2.0 * d * d * d;
    Ok(TiltedMoments { log_v: s.log_ref + n0.ln(), a: s.center + d, var, m3 })
}

fn gaussian_moments(sigma: f64, p: TiltParams) -> TiltedMoments {
    let s2 = sigma * sigma;
    let var = s2 / (1.0 + p.b * s2);
    TiltedMoments {
        log_v: 0.5 * (var / s2).ln() + 0.5 * p.c * p.c * var,
        a: p.c * var,
        var,
        m3: 0.0,
    }
}

fn atom_sums(points: &[f64], weights: &[f64], p: TiltParams) -> TiltSums {
    let psi = |i: usize| weights[i].ln() + p.log_tilt(points[i]);
    let best = (0..points.len()).max_by(|&i, &j| psi(i).total_cmp(&psi(j))).unwrap_or(0);
    let log_ref = psi(best);
    let center = points[best];
    let mut n = [0.0; 4];
    for i in 0..points.len() {
        let e = (psi(i) - log_ref).exp();
        let d = points[i] - center;
        n[0] += e;
        n[1] += e * d;
        n[2] += e * d * d;
        n[3] += e * d * d * d;
    }
    TiltSums { log_ref, center, n }
}

/// Raw linear-domain sums about zero; the cross-check for atoms.
fn atom_naive(points: &[f64], weights: &[f64], p: TiltParams) -> TiltedMoments {
    let mut raw = [0.0; 4];
    for (x, w) in points.iter().zip(weights) {
        let e = w * p.log_tilt(*x).exp();
        raw[0] += e;
        raw[1] += e * x;
        raw[2] += e * x * x;
        raw[3] += e * x * x * x;
    }
    let a = raw[1] / raw[0];
    let m2 = raw[2] / raw[0];
    let var = m2 - a * a;
    TiltedMoments {
        log_v: raw[0].ln(),
        a,
        var,
        m3: raw[3] / raw[0] - 3.0 * a * m2 + 2.0 * a * a * a,
    }
}

/// Log-density of the family (w.r.t. Lebesgue), for the quadrature route.
fn log_density(family: &Family, x: f64) -> f64 {
    match family {
        Family::Gaussian { sigma } => -0.5 * (x / sigma).powi(2) - (sigma * (2.0 * PI).sqrt()).ln(),
        Family::Laplace { scale } => -x.abs() / scale - (2.0 * scale).ln(),
        Family::Uniform { lo, hi } => {
            if x >= *lo && x <= *hi {
                -(hi - lo).ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        Family::Grid(g) => {
            let n = g.xs.len();
            if x < g.xs[0] || x > g.xs[n - 1] {
                return f64::NEG_INFINITY;
            }
            let i = g.xs.partition_point(|p| *p <= x).clamp(1, n - 1) - 1;
            let t = (x - g.xs[i]) / (g.xs[i + 1] - g.xs[i]);
            (g.fs[i] + t * (g.fs[i + 1] - g.fs[i])).max(0.0).ln()
        }
        Family::Atoms(_) => f64::NEG_INFINITY,
    }
}

impl Measure {
    /// Tilted moments using the chosen evaluation route.
    pub fn tilted_moments_with(&self, p: TiltParams, engine: Engine) -> Result<TiltedMoments> {
        let p = TiltParams::new(p.b, p.c)?;
        let (clo, chi) = self.c_domain(p.b);
        if !(p.c > clo && p.c < chi) {
            return Err(Error::TiltNotIntegrable { b: p.b, c: p.c });
        }
        match (&self.family, engine) {
            (Family::Gaussian { sigma }, Engine::Auto) => Ok(gaussian_moments(*sigma, p)),
            (Family::Atoms(t), Engine::Auto) => from_sums(&atom_sums(&t.points, &t.weights, p), p),
            (Family::Atoms(t), Engine::Quadrature) => Ok(atom_naive(&t.points, &t.weights, p)),
            (_, Engine::Auto) => from_sums(&segment::tilt_sums(&self.segments, p.b, p.c, None)?, p),
            (family, Engine::Quadrature) => self.quadrature_moments(family, p),
        }
    }

    fn quadrature_moments(&self, family: &Family, p: TiltParams) -> Result<TiltedMoments> {
        let ell = |x: f64| log_density(family, x) + p.log_tilt(x);
        let hull = self.support_hull();
        // Candidate peaks: kinks, ends and the mode of each concave piece.
        let mut cands: Vec<f64> = match family {
            Family::Gaussian { sigma } => vec![p.c / (1.0 / (sigma * sigma) + p.b)],
            Family::Laplace { scale } => {
                let mut v = vec![0.0];
                if p.b > 0.0 {
                    v.push((p.c - 1.0 / scale) / p.b);
                    v.push((p.c + 1.0 / scale) / p.b);
                }
                v
            }
            Family::Uniform { lo, hi } => vec![*lo, *hi],
            Family::Grid(g) => g.xs.clone(),
            Family::Atoms(_) => unreachable!("atoms have no density"),
        };
        if p.b > 0.0 {
            cands.push(p.c / p.b);
        }
        cands.retain(|x| hull.contains(*x));
        let peak = cands
            .iter()
            .copied()
            .filter(|x| ell(*x).is_finite())
            .max_by(|x, y| ell(*x).total_cmp(&ell(*y)))
            .ok_or(Error::TiltNotIntegrable { b: p.b, c: p.c })?;
        let log_ref = ell(peak);
        let scale = match family {
            Family::Gaussian { sigma } => (sigma * sigma / (1.0 + p.b * sigma * sigma)).sqrt(),
            Family::Laplace { scale } => *scale / (1.0 + p.b.sqrt() * scale),
            _ => 0.01 * (hull.hi - hull.lo),
        };
        let lo = quadrature::find_cutoff(&ell, peak, -1.0, scale, 46.0, hull.lo);
        let hi = quadrature::find_cutoff(&ell, peak, 1.0, scale, 46.0, hull.hi);
        let mut breaks: Vec<f64> = cands.into_iter().chain([lo, hi, peak]).filter(|x| *x >= lo && *x <= hi).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let n = quadrature::adaptive_sums(ell, &breaks, peak, log_ref, 1e-12)?;
        from_sums(&TiltSums { log_ref, center: peak, n }, p)
    }

    fn c_domain(&self, b: f64) -> (f64, f64) {
        match self.family {
            Family::Laplace { scale } if b == 0.0 => (-1.0 / scale, 1.0 / scale),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

impl TiltFamily for Measure {
    fn tilted_moments(&self, p: TiltParams) -> Result<TiltedMoments> {
        self.tilted_moments_with(p, Engine::Auto)
    }

    fn c_domain(&self, b: f64) -> (f64, f64) {
        Measure::c_domain(self, b)
    }

    fn support_hull(&self) -> Hull {
        Measure::support_hull(self)
    }

    fn tilted_mass(&self, p: TiltParams, lo: f64, hi: f64) -> Result<f64> {
        let m = self.tilted_moments(p)?;
        match &self.family {
            Family::Gaussian { .. } => {
                let sd = m.var.sqrt();
                let upper = |x: f64| 0.5 * erfc((x - m.a) / (sd * SQRT_2));
                Ok((upper(lo) - upper(hi)).clamp(0.0, 1.0))
            }
            Family::Atoms(t) => {
                let s = atom_sums(&t.points, &t.weights, p);
                let inside: f64 = t
                    .points
                    .iter()
                    .zip(&t.weights)
                    .filter(|(x, _)| **x >= lo && **x <= hi)
                    .map(|(x, w)| (w.ln() + p.log_tilt(*x) - s.log_ref).exp())
                    .sum();
                Ok((inside / s.n[0]).clamp(0.0, 1.0))
            }
            _ => {
                let s = segment::tilt_sums(&self.segments, p.b, p.c, Some((lo, hi)))?;
                if s.n[0] <= 0.0 {
                    return Ok(0.0);
                }
                Ok((s.log_ref + s.n[0].ln() - m.log_v).exp().clamp(0.0, 1.0))
            }
        }
    }
}

/// Tilted moments `(V, a, A, m3)` of μ.
pub fn tilted_moments(mu: &Measure, p: TiltParams) -> Result<TiltedMoments> {
    mu.tilted_moments(p)
}

/// Density `V⁻¹ e^{cx - bx²/2}` of the tilted measure with respect to μ.
pub fn tilted_density(mu: &Measure, p: TiltParams, x: f64) -> Result<f64> {
    mu.tilted_density(p, x)
}

/// Options of the root finder behind [`solve_c`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Accept when `|a(b, c) - a_target| ≤ tol_rel·(1 + |a_target|)`.
    pub tol_rel: f64,
    pub max_iter: usize,
    /// Starting point; defaults to 0.
    pub guess: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol_rel: TOL_A, max_iter: MAX_SOLVE_ITER, guess: None }
    }
}

/// The `c` at which the `b`-tilt of μ has mean `a_target`.
pub fn solve_c<F: TiltFamily + ?Sized>(mu: &F, a_target: f64, b: f64) -> Result<f64> {
    solve_c_with(mu, a_target, b, SolveOptions::default()).map(|(c, _)| c)
}

/// Safeguarded Newton on the increasing map `c ↦ a(b, c)`, whose derivative
/// is the tilted variance. Returns the root together with the moments there.
pub fn solve_c_with<F: TiltFamily + ?Sized>(
    mu: &F,
    a_target: f64,
    b: f64,
    opts: SolveOptions,
) -> Result<(f64, TiltedMoments)> {
    let hull = mu.support_hull();
    if !hull.contains_open(a_target) {
        return Err(Error::TargetOutsideHull { target: a_target, lo: hull.lo, hi: hull.hi });
    }
    let tol = opts.tol_rel * (1.0 + a_target.abs());
    // Rounding floor: below this the residual is noise.
    let floor = 64.0 * f64::EPSILON * (1.0 + a_target.abs());
    let (mut lo, mut hi) = mu.c_domain(b);
    let mut c = opts.guess.filter(|g| g.is_finite() && *g > lo && *g < hi).unwrap_or_else(|| {
        if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            0.0f64.clamp(lo.max(-f64::MAX), hi.min(f64::MAX))
        }
    });
    let mut trust = 1.0f64.max(c.abs());
    let mut best: Option<(f64, f64, TiltedMoments)> = None;
    for _ in 0..opts.max_iter {
        let m = match mu.tilted_moments(TiltParams { b, c }) {
            Ok(m) => m,
            Err(Error::TiltNotIntegrable { .. }) => {
                if c > 0.0 {
                    hi = hi.min(c);
                } else {
                    lo = lo.max(c);
                }
                c = next_probe(lo, hi, c, &mut trust);
                continue;
            }
            Err(e) => return Err(e),
        };
        let r = m.a - a_target;
        if r.abs() <= tol {
            return Ok((c, m));
        }
        if best.as_ref().is_none_or(|(_, br, _)| r.abs() < br.abs()) {
            best = Some((c, r, m));
        }
        if r < 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        let newton = c - r / m.var;
        let bounded = lo.is_finite() && hi.is_finite();
        let next = if newton.is_finite()
            && newton > lo
            && newton < hi
            && (bounded || (newton - c).abs() <= trust)
        {
            newton
        } else {
            next_probe(lo, hi, c, &mut trust)
        };
        if next == c || (bounded && hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs())) {
            // No representable progress left.
            if r.abs() <= floor.max(tol) {
                return Ok((c, m));
            }
            break;
        }
        c = next;
    }
    match best {
        Some((c, r, m)) if r.abs() <= floor => Ok((c, m)),
        Some((_, r, _)) => Err(Error::NoConvergence { iterations: opts.max_iter, residual: r.abs() }),
        None => Err(Error::NoConvergence { iterations: opts.max_iter, residual: f64::INFINITY }),
    }
}

/// Bisection when the bracket is finite, doubling expansion otherwise.
fn next_probe(lo: f64, hi: f64, c: f64, trust: &mut f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => {
            let x = lo.max(c) + *trust;
            *trust *= 2.0;
            x
        }
        (false, true) => {
            let x = hi.min(c) - *trust;
            *trust *= 2.0;
            x
        }
        (false, false) => c,
    }
}

/// Derivatives of `a(b, c)` and `c(a, b)` from the tilted moments.
pub fn tilt_derivatives<F: TiltFamily + ?Sized>(mu: &F, p: TiltParams) -> Result<TiltDerivatives> {
    let m = mu.tilted_moments(p)?;
    derivatives_from(&m)
}

pub(crate) fn derivatives_from(m: &TiltedMoments) -> Result<TiltDerivatives> {
    if !(m.var > 1e-300) {
        return Err(Error::DegenerateTilt { var: m.var });
    }
    // ∂a/∂b = -Cov(x, x²)/2 and Cov(x, x²) = m3 + 2aA.
    let a1 = -0.5 * (m.m3 + 2.0 * m.a * m.var);
    let a2 = m.var;
    Ok(TiltDerivatives {
        a1,
        a2,
        c1: 1.0 / a2,
        c2: -a1 / a2,
        c11: -m.m3 / (a2 * a2 * a2),
    })
}

/// μ reweighted by a fixed tilt, usable wherever a measure can be tilted.
///
/// Tilts compose additively, so this only stores the base measure and the
/// accumulated parameters.
#[derive(Debug, Clone)]
pub struct TiltedMeasure {
    base: Measure,
    offset: TiltParams,
    at_offset: TiltedMoments,
}

/// Handle on `V⁻¹ e^{cx - bx²/2} μ(dx)`.
pub fn tilted_measure(mu: &Measure, p: TiltParams) -> Result<TiltedMeasure> {
    TiltedMeasure::new(mu.clone(), p)
}

impl TiltedMeasure {
    pub fn new(base: Measure, offset: TiltParams) -> Result<Self> {
        let at_offset = base.tilted_moments(offset)?;
        Ok(Self { base, offset, at_offset })
    }

    pub fn compose(&self, p: TiltParams) -> Result<Self> {
        Self::new(self.base.clone(), self.offset.compose(p))
    }

    pub fn base(&self) -> &Measure {
        &self.base
    }

    pub fn offset(&self) -> TiltParams {
        self.offset
    }

    pub fn mean(&self) -> f64 {
        self.at_offset.a
    }

    pub fn variance(&self) -> f64 {
        self.at_offset.var
    }
}

impl TiltFamily for TiltedMeasure {
    fn tilted_moments(&self, p: TiltParams) -> Result<TiltedMoments> {
        let m = self.base.tilted_moments(self.offset.compose(p))?;
        Ok(TiltedMoments { log_v: m.log_v - self.at_offset.log_v, ..m })
    }

    fn c_domain(&self, b: f64) -> (f64, f64) {
        let (lo, hi) = self.base.c_domain(self.offset.b + b);
        (lo - self.offset.c, hi - self.offset.c)
    }

    fn support_hull(&self) -> Hull {
        self.base.support_hull()
    }

    fn tilted_mass(&self, p: TiltParams, lo: f64, hi: f64) -> Result<f64> {
        self.base.tilted_mass(self.offset.compose(p), lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_point() -> Measure {
        Measure::atoms(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn identity_tilt_gives_base_moments() {
        for m in [Measure::gaussian(1.3).unwrap(), Measure::uniform(-1.0, 1.0).unwrap(), two_point()] {
            let t = m.tilted_moments(TiltParams::ZERO).unwrap();
            assert_relative_eq!(t.v(), 1.0, epsilon = 1e-14);
            assert!(t.a.abs() < 1e-14);
            assert_relative_eq!(t.var, m.variance(), max_relative = 1e-13);
        }
    }

    #[test]
    fn laplace_integrability_at_zero_b() {
        let m = Measure::laplace(1.0).unwrap();
        assert!(m.tilted_moments(TiltParams { b: 0.0, c: 0.99 }).is_ok());
        assert!(matches!(
            m.tilted_moments(TiltParams { b: 0.0, c: 1.0 }),
            Err(Error::TiltNotIntegrable { .. })
        ));
        assert!(m.tilted_moments(TiltParams { b: 1e-3, c: 5.0 }).is_ok());
    }

    #[test]
    fn laplace_shifted_exponential_closed_form() {
        // At b = 0 the Laplace tilt is a two-sided exponential with rates 1 ∓ c.
        let m = Measure::laplace(1.0).unwrap();
        let c = 0.4;
        let t = m.tilted_moments(TiltParams { b: 0.0, c }).unwrap();
        let (r, l) = (1.0 - c, 1.0 + c);
        let v = 0.5 * (1.0 / r + 1.0 / l);
        assert_relative_eq!(t.v(), v, max_relative = 1e-14);
        let mean = 0.5 * (1.0 / (r * r) - 1.0 / (l * l)) / v;
        assert_relative_eq!(t.a, mean, max_relative = 1e-13);
    }

    #[test]
    fn solve_c_hull_errors() {
        let m = two_point();
        assert!(matches!(solve_c(&m, 1.0, 0.5), Err(Error::TargetOutsideHull { .. })));
        assert!(matches!(solve_c(&m, -1.5, 0.5), Err(Error::TargetOutsideHull { .. })));
    }

    #[test]
    fn solve_c_near_the_hull_edge() {
        let m = Measure::uniform(-1.0, 1.0).unwrap();
        for &(a, b) in &[(0.999_999, 3.0), (-0.999_99, 1e4), (0.5, 1e8), (1.0 - 1e-9, 0.0)] {
            let c = solve_c(&m, a, b).unwrap();
            let got = m.tilted_moments(TiltParams { b, c }).unwrap().a;
            assert!((got - a).abs() <= TOL_A * (1.0 + a.abs()), "a={a} b={b} c={c} got={got}");
        }
    }

    #[test]
    fn derivatives_closed_form_gaussian() {
        let m = Measure::gaussian(1.0).unwrap();
        let d = tilt_derivatives(&m, TiltParams { b: 1.0, c: 2.0 }).unwrap();
        assert_relative_eq!(d.a2, 0.5, max_relative = 1e-15);
        assert_relative_eq!(d.c1, 2.0, max_relative = 1e-15);
        assert_eq!(d.c11, 0.0);
    }

    #[test]
    fn degenerate_tilt_rejected() {
        let m = Measure::atoms(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(tilt_derivatives(&m, TiltParams::ZERO), Err(Error::DegenerateTilt { .. })));
    }

    #[test]
    fn window_mass_is_a_probability() {
        let m = Measure::uniform(-1.0, 1.0).unwrap();
        let p = TiltParams { b: 2.0, c: 1.0 };
        let all = m.tilted_mass(p, -1.0, 1.0).unwrap();
        assert_relative_eq!(all, 1.0, max_relative = 1e-13);
        let left = m.tilted_mass(p, -1.0, 0.2).unwrap();
        let right = m.tilted_mass(p, 0.2, 1.0).unwrap();
        assert_relative_eq!(left + right, 1.0, max_relative = 1e-13);
    }
}
