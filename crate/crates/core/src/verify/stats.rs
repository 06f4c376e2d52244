//! Kolmogorov–Smirnov statistics, sample moments and the survival-curve fit.

use serde::Serialize;

use crate::error::{Error, Result};

/// Upper tail `P(K > λ)` of the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 0.2 {
        // The alternating series converges slowly here; the CDF is
        // numerically zero below 0.2.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a KS statistic `d` at effective sample size `n`,
/// with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let rn = n.sqrt();
    kolmogorov_q((rn + 0.12 + 0.11 / rn) * d)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS distance between the samples and a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(samples);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        // Ties: the empirical CDF jumps over the whole run at once.
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// KS distance over a finite set of atoms: samples are assigned to the
/// nearest atom and the two CDFs are compared at each atom.
pub fn ks_discrete(samples: &[f64], points: &[f64], weights: &[f64]) -> f64 {
    let mut counts = vec![0usize; points.len()];
    for x in samples {
        let k = points.partition_point(|p| p < x);
        let k = if k == 0 {
            0
        } else if k == points.len() || (x - points[k - 1]) <= (points[k] - x) {
            k - 1
        } else {
            k
        };
        counts[k] += 1;
    }
    let n = samples.len() as f64;
    let (mut fe, mut ft, mut d) = (0.0, 0.0, 0.0f64);
    for (c, w) in counts.iter().zip(weights) {
        fe += *c as f64 / n;
        ft += w;
        d = d.max((fe - ft).abs());
    }
    d
}

/// Two-sample KS distance and its asymptotic p-value (effective size `nm/(n+m)`).
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> (f64, f64) {
    if x.is_empty() || y.is_empty() {
        return (1.0, 0.0);
    }
    let (a, b) = (sorted(x), sorted(y));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    (d, ks_p_value(d, n * m / (n + m)))
}

/// Sample mean, its standard error, and the sample standard deviation.
pub fn mean_se(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt(), sd)
}

/// Empirical survival function `P̂(T > t)` at each distinct sample value.
pub fn survival_table(samples: &[f64]) -> Vec<(f64, f64)> {
    let v = sorted(samples);
    let n = v.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        out.push((v[i], (v.len() - j - 1) as f64 / n));
        i = j + 1;
    }
    out
}

/// Least-squares fit of `log P̂(T > t) ≈ log C - rate·t`.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub rate: f64,
    pub log_c: f64,
    pub r2: f64,
    pub n_points: usize,
    pub survival: Vec<(f64, f64)>,
}

/// Window of survival probabilities used by the fit.
pub const TAIL_WINDOW: (f64, f64) = (1e-3, 0.5);
/// Minimum sample count for a tail estimate.
pub const TAIL_MIN_SAMPLES: usize = 10_000;

/// Fit the exponential tail of `samples` over the window where
/// `P̂ ∈ [0.001, 0.5]`, weighting each point by `n P̂/(1 - P̂)`, the inverse
/// variance of `log P̂`.
pub fn tail_estimate(samples: &[f64]) -> Result<TailFit> {
    if samples.len() < TAIL_MIN_SAMPLES {
        return Err(Error::InsufficientPaths { needed: TAIL_MIN_SAMPLES, got: samples.len() });
    }
    let survival = survival_table(samples);
    let n = samples.len() as f64;
    let pts: Vec<(f64, f64, f64)> = survival
        .iter()
        .filter(|(_, p)| *p >= TAIL_WINDOW.0 && *p <= TAIL_WINDOW.1)
        .map(|&(t, p)| (t, p.ln(), n * p / (1.0 - p)))
        .collect();
    if pts.len() < 5 {
        return Err(Error::DegenerateTail { distinct: pts.len() });
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateTail { distinct: 1 });
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(TailFit { rate: -slope, log_c: my - slope * mx, r2, n_points: pts.len(), survival })
}
