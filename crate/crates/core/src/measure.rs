//! Centered one-dimensional probability measures.
//!
//! A [`Measure`] is built from a [`MeasureSpec`] (the JSON measure file) and
//! validated on construction: total mass one, mean zero and finite variance.
//! Five concrete families are supported; each has an exact CDF and quantile
//! function, which also back the inverse-CDF sampling oracle.

use std::path::Path;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use libm::erfc;

use crate::error::{Error, Result};
use crate::tilt::segment::Segment;
use crate::tilt::segments_of;

/// Maximum tolerated deviation of the total mass from one.
pub const TOL_MASS: f64 = 1e-10;
/// Maximum tolerated |mean| for a measure to count as centered.
pub const TOL_CENTER: f64 = 1e-9;

/// Serialized description of a measure, tagged by `type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MeasureSpec {
    Gaussian { sigma: f64 },
    /// Density `exp(-|x| / scale) / (2 scale)`.
    Laplace { scale: f64 },
    Uniform { lo: f64, hi: f64 },
    Atoms { points: Vec<f64>, weights: Vec<f64> },
    /// Piecewise-linear density through `(xs[i], fs[i])`, zero outside.
    Grid { xs: Vec<f64>, fs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureOptions {
    /// Translate the measure so that its mean is zero.
    #[serde(default)]
    pub center: bool,
    /// User assertion that the measure is log-concave.
    #[serde(default)]
    pub logconcave_hint: bool,
}

/// On-disk layout of a measure file: the spec plus the optional flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    #[serde(flatten)]
    pub spec: MeasureSpec,
    #[serde(default)]
    pub center: bool,
    #[serde(default)]
    pub logconcave_hint: bool,
}

/// Smallest closed interval carrying the measure. Either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hull {
    pub lo: f64,
    pub hi: f64,
}

impl Hull {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Strict interior test; the flow's mean can only live here.
    pub fn contains_open(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// `L` with `[lo, hi] ⊆ [-L, L]`, infinite for unbounded hulls.
    pub fn half_width(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn nearest_end(&self, x: f64) -> f64 {
        if (x - self.lo).abs() <= (self.hi - x).abs() {
            self.lo
        } else {
            self.hi
        }
    }
}

/// Lower and upper bounds of a Lebesgue density on its support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityBounds {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AtomTable {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// `cum[i]` = mass of atoms `0..=i`.
    pub cum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GridTable {
    pub xs: Vec<f64>,
    pub fs: Vec<f64>,
    /// CDF at each node.
    pub cum: Vec<f64>,
}

impl GridTable {
    fn new(xs: Vec<f64>, fs: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 1..xs.len() {
            acc += 0.5 * (xs[i] - xs[i - 1]) * (fs[i] + fs[i - 1]);
            cum.push(acc);
        }
        Self { xs, fs, cum }
    }

    fn mass(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    /// Exact `∫ (x - shift)^k f(x) dx` for k ≤ 2 (Simpson is exact up to cubics).
    fn moment(&self, k: i32, shift: f64) -> f64 {
        self.xs
            .windows(2)
            .zip(self.fs.windows(2))
            .map(|(x, f)| {
                let xm = 0.5 * (x[0] + x[1]);
                let fm = 0.5 * (f[0] + f[1]);
                let g = |x: f64, f: f64| (x - shift).powi(k) * f;
                (x[1] - x[0]) / 6.0 * (g(x[0], f[0]) + 4.0 * g(xm, fm) + g(x[1], f[1]))
            })
            .sum()
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let slope = (self.fs[i + 1] - self.fs[i]) / (x1 - x0);
        let fx = self.fs[i] + slope * (x - x0);
        (self.cum[i] + 0.5 * (x - x0) * (self.fs[i] + fx)).clamp(0.0, 1.0)
    }

    fn quantile(&self, u: f64) -> f64 {
        let n = self.xs.len();
        let target = u * self.mass();
        let i = match self.cum.binary_search_by(|p| p.total_cmp(&target)) {
            Ok(i) => return self.xs[i.min(n - 1)],
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let f0 = self.fs[i];
        let slope = (self.fs[i + 1] - f0) / (x1 - x0);
        let r = target - self.cum[i];
        // Solve f0 d + slope d²/2 = r in the cancellation-free form.
        let disc = (f0 * f0 + 2.0 * slope * r).max(0.0);
        let denom = f0 + disc.sqrt();
        let d = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        (x0 + d).clamp(x0, x1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Family {
    Gaussian { sigma: f64 },
    Laplace { scale: f64 },
    Uniform { lo: f64, hi: f64 },
    Atoms(AtomTable),
    Grid(GridTable),
}

/// A validated, centered probability measure on the real line.
///
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub(crate) family: Family,
    /// Affine-density pieces used by the closed-form tilt engine.
    pub(crate) segments: Vec<Segment>,
    logconcave_hint: bool,
    moments: Moments,
    hull: Hull,
}

/// Build and validate a measure.
pub fn make_measure(spec: &MeasureSpec, options: MeasureOptions) -> Result<Measure> {
    Measure::new(spec, options)
}

fn finite_positive(v: f64, name: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::MalformedSpec(format!("{name} must be a positive finite number, got {v}")))
    }
}

fn all_finite(v: &[f64], name: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::MalformedSpec(format!("{name} contains a non-finite value")))
    }
}

impl Measure {
    pub fn new(spec: &MeasureSpec, options: MeasureOptions) -> Result<Self> {
        let (family, mean) = match spec {
            MeasureSpec::Gaussian { sigma } => {
                finite_positive(*sigma, "sigma")?;
                (Family::Gaussian { sigma: *sigma }, 0.0)
            }
            MeasureSpec::Laplace { scale } => {
                finite_positive(*scale, "scale")?;
                (Family::Laplace { scale: *scale }, 0.0)
            }
            MeasureSpec::Uniform { lo, hi } => {
                all_finite(&[*lo, *hi], "uniform bounds")?;
                if lo >= hi {
                    return Err(Error::MalformedSpec(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
                }
                (Family::Uniform { lo: *lo, hi: *hi }, 0.5 * (lo + hi))
            }
            MeasureSpec::Atoms { points, weights } => build_atoms(points, weights)?,
            MeasureSpec::Grid { xs, fs } => build_grid(xs, fs)?,
        };

        let family = if mean.abs() > TOL_CENTER {
            if !options.center {
                return Err(Error::NotCentered { mean });
            }
            shift_family(family, -mean)
        } else {
            family
        };

        let moments = family_moments(&family);
        if !moments.var.is_finite() {
            return Err(Error::InfiniteVariance);
        }
        if moments.mean.abs() > TOL_CENTER {
            return Err(Error::NotCentered { mean: moments.mean });
        }
        let hull = family_hull(&family);
        if moments.var <= 0.0 && !(hull.lo == 0.0 && hull.hi == 0.0) {
            return Err(Error::MalformedSpec("zero variance away from the origin".into()));
        }
        let segments = segments_of(&family);
        Ok(Self { family, segments, logconcave_hint: options.logconcave_hint, moments, hull })
    }

    pub fn from_file_spec(file: &MeasureFile) -> Result<Self> {
        Self::new(
            &file.spec,
            MeasureOptions { center: file.center, logconcave_hint: file.logconcave_hint },
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MeasureFile =
            serde_json::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))?;
        Self::from_file_spec(&file)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(&MeasureSpec::Gaussian { sigma }, MeasureOptions::default())
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        Self::new(&MeasureSpec::Laplace { scale }, MeasureOptions::default())
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(&MeasureSpec::Uniform { lo, hi }, MeasureOptions::default())
    }

    pub fn atoms(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::new(&MeasureSpec::Atoms { points, weights }, MeasureOptions::default())
    }

    pub fn grid(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        Self::new(&MeasureSpec::Grid { xs, fs }, MeasureOptions::default())
    }

    /// Grid density with `fs` rescaled to unit trapezoid mass and the nodes
    /// shifted so the mean is zero.
    pub fn grid_normalized(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        let mass: f64 = xs
            .windows(2)
            .zip(fs.windows(2))
            .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
            .sum();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::MassNotOne { mass });
        }
        let fs = fs.into_iter().map(|f| f / mass).collect();
        Self::new(
            &MeasureSpec::Grid { xs, fs },
            MeasureOptions { center: true, logconcave_hint: false },
        )
    }

    /// The (possibly re-centered) measure as a serializable spec.
    pub fn spec(&self) -> MeasureSpec {
        match &self.family {
            Family::Gaussian { sigma } => MeasureSpec::Gaussian { sigma: *sigma },
            Family::Laplace { scale } => MeasureSpec::Laplace { scale: *scale },
            Family::Uniform { lo, hi } => MeasureSpec::Uniform { lo: *lo, hi: *hi },
            Family::Atoms(t) => MeasureSpec::Atoms { points: t.points.clone(), weights: t.weights.clone() },
            Family::Grid(g) => MeasureSpec::Grid { xs: g.xs.clone(), fs: g.fs.clone() },
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Gaussian { .. } => "gaussian",
            Family::Laplace { .. } => "laplace",
            Family::Uniform { .. } => "uniform",
            Family::Atoms(_) => "atoms",
            Family::Grid(_) => "grid",
        }
    }

    pub fn moments(&self) -> Moments {
        self.moments
    }

    pub fn mean(&self) -> f64 {
        self.moments.mean
    }

    pub fn variance(&self) -> f64 {
        self.moments.var
    }

    pub fn support_hull(&self) -> Hull {
        self.hull
    }

    /// Dirac mass at the origin; the flow has nothing to do.
    pub fn is_dirac(&self) -> bool {
        self.moments.var == 0.0
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.family, Family::Atoms(_))
    }

    /// Atom locations for atomic measures.
    pub fn atom_points(&self) -> Option<&[f64]> {
        match &self.family {
            Family::Atoms(t) => Some(&t.points),
            _ => None,
        }
    }

    pub fn atom_weights(&self) -> Option<&[f64]> {
        match &self.family {
            Family::Atoms(t) => Some(&t.weights),
            _ => None,
        }
    }

    /// Gaussian, Laplace and uniform are log-concave by construction; other
    /// families only when the user asserts it.
    pub fn is_logconcave(&self) -> bool {
        self.logconcave_hint
            || matches!(
                self.family,
                Family::Gaussian { .. } | Family::Laplace { .. } | Family::Uniform { .. }
            )
            || self.is_dirac()
    }

    pub fn logconcave_hint(&self) -> bool {
        self.logconcave_hint
    }

    /// `σ` of a Gaussian measure, the natural choice in the uniformly
    /// log-concave bound `T ≤ σ²`.
    pub fn gaussian_sigma(&self) -> Option<f64> {
        match self.family {
            Family::Gaussian { sigma } => Some(sigma),
            _ => None,
        }
    }

    /// Density bounds on the support, for absolutely continuous measures with
    /// compact support.
    pub fn density_bounds(&self) -> Option<DensityBounds> {
        match &self.family {
            Family::Uniform { lo, hi } => {
                let f = 1.0 / (hi - lo);
                Some(DensityBounds { alpha: f, beta: f })
            }
            Family::Grid(g) => {
                let alpha = g.fs.iter().cloned().fold(f64::INFINITY, f64::min);
                let beta = g.fs.iter().cloned().fold(0.0, f64::max);
                Some(DensityBounds { alpha, beta })
            }
            _ => None,
        }
    }

    /// Right-continuous distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match &self.family {
            Family::Gaussian { sigma } => 0.5 * erfc(-x / (sigma * std::f64::consts::SQRT_2)),
            Family::Laplace { scale } => {
                if x < 0.0 {
                    0.5 * (x / scale).exp()
                } else {
                    1.0 - 0.5 * (-x / scale).exp()
                }
            }
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::Atoms(t) => match t.points.partition_point(|p| *p <= x) {
                0 => 0.0,
                k => t.cum[k - 1].min(1.0),
            },
            Family::Grid(g) => g.cdf(x),
        }
    }

    /// Generalized inverse: the smallest `x` with `cdf(x) ≥ u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.family {
            Family::Gaussian { sigma } => Normal::new(0.0, *sigma)
                .map(|n| n.inverse_cdf(u))
                .unwrap_or(f64::NAN),
            Family::Laplace { scale } => {
                if u < 0.5 {
                    scale * (2.0 * u).ln()
                } else {
                    -scale * (2.0 * (1.0 - u)).ln()
                }
            }
            Family::Uniform { lo, hi } => lo + u * (hi - lo),
            Family::Atoms(t) => {
                let k = t.cum.partition_point(|c| *c < u - 1e-15);
                t.points[k.min(t.points.len() - 1)]
            }
            Family::Grid(g) => g.quantile(u),
        }
    }

    /// `n` i.i.d. draws by inverse-CDF transform, deterministic in `seed`.
    pub fn sample_oracle(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile(u)
            })
            .collect()
    }
}

fn build_atoms(points: &[f64], weights: &[f64]) -> Result<(Family, f64)> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::MalformedSpec(format!(
            "atoms need equally many points and weights (got {} and {})",
            points.len(),
            weights.len()
        )));
    }
    all_finite(points, "points")?;
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::MalformedSpec("atom weights must be positive and finite".into()));
    }
    let mass: f64 = weights.iter().sum();
    if (mass - 1.0).abs() > TOL_MASS {
        return Err(Error::MassNotOne { mass });
    }
    let mut pairs: Vec<(f64, f64)> = points.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Merge coincident atoms.
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (x, w) in pairs {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => merged.push((x, w)),
        }
    }
    let points: Vec<f64> = merged.iter().map(|p| p.0).collect();
    let weights: Vec<f64> = merged.iter().map(|p| p.1).collect();
    let mean = points.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / mass;
    Ok((Family::Atoms(atom_table(points, weights)), mean))
}

fn atom_table(points: Vec<f64>, weights: Vec<f64>) -> AtomTable {
    let cum = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    AtomTable { points, weights, cum }
}

fn build_grid(xs: &[f64], fs: &[f64]) -> Result<(Family, f64)> {
    if xs.len() < 2 || xs.len() != fs.len() {
        return Err(Error::MalformedSpec(format!(
            "grid needs at least two nodes and equally many densities (got {} and {})",
            xs.len(),
            fs.len()
        )));
    }
    all_finite(xs, "xs")?;
    all_finite(fs, "fs")?;
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::MalformedSpec("grid nodes must be strictly increasing".into()));
    }
    if fs.iter().any(|f| *f < 0.0) {
        return Err(Error::MalformedSpec("grid densities must be nonnegative".into()));
    }
    if !fs.iter().any(|f| *f > 0.0) {
        return Err(Error::MalformedSpec("grid density is identically zero".into()));
    }
    // Trim segments of zero density at both ends so the grid spans the hull.
    let first = (0..fs.len() - 1).find(|&i| fs[i] > 0.0 || fs[i + 1] > 0.0).unwrap_or(0);
    let last = (1..fs.len()).rev().find(|&i| fs[i] > 0.0 || fs[i - 1] > 0.0).unwrap_or(fs.len() - 1);
    let table = GridTable::new(xs[first..=last].to_vec(), fs[first..=last].to_vec());
    let mass = table.mass();
    if (mass - 1.0).abs() > TOL_MASS {
        return Err(Error::MassNotOne { mass });
    }
    let mean = table.moment(1, 0.0) / mass;
    Ok((Family::Grid(table), mean))
}

fn shift_family(family: Family, by: f64) -> Family {
    match family {
        Family::Uniform { lo, hi } => {
            let half = 0.5 * (hi - lo);
            Family::Uniform { lo: -half, hi: half }
        }
        Family::Atoms(t) => {
            let points = t.points.iter().map(|x| x + by).collect();
            Family::Atoms(atom_table(points, t.weights))
        }
        Family::Grid(g) => {
            let xs = g.xs.iter().map(|x| x + by).collect();
            Family::Grid(GridTable::new(xs, g.fs))
        }
        other => other,
    }
}

fn family_moments(family: &Family) -> Moments {
    match family {
        Family::Gaussian { sigma } => Moments { mean: 0.0, var: sigma * sigma },
        Family::Laplace { scale } => Moments { mean: 0.0, var: 2.0 * scale * scale },
        Family::Uniform { lo, hi } => Moments { mean: 0.5 * (lo + hi), var: (hi - lo).powi(2) / 12.0 },
        Family::Atoms(t) => {
            let mean: f64 = t.points.iter().zip(&t.weights).map(|(x, w)| x * w).sum();
            let var = t.points.iter().zip(&t.weights).map(|(x, w)| w * (x - mean).powi(2)).sum();
            Moments { mean, var }
        }
        Family::Grid(g) => {
            let mass = g.mass();
            let mean = g.moment(1, 0.0) / mass;
            Moments { mean, var: g.moment(2, mean) / mass }
        }
    }
}

fn family_hull(family: &Family) -> Hull {
    match family {
        Family::Gaussian { .. } | Family::Laplace { .. } => Hull { lo: f64::NEG_INFINITY, hi: f64::INFINITY },
        Family::Uniform { lo, hi } => Hull { lo: *lo, hi: *hi },
        Family::Atoms(t) => Hull { lo: t.points[0], hi: *t.points.last().unwrap() },
        Family::Grid(g) => Hull { lo: g.xs[0], hi: *g.xs.last().unwrap() },
    }
}
