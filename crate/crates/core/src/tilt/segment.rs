//! Closed-form tilted integrals for piecewise-linear densities.
//!
//! Every supported continuous family (uniform, Laplace, grid) reduces to a
//! sum over segments on which the density is affine and the log-tilt is a
//! concave quadratic. Each segment is split at the quadratic's mode into
//! pieces `x = x_p + σu`, `u ∈ [0, h]`, on which the exponent decays like
//! `-λu - κu²/2` with `λ, κ ≥ 0`. The moments of such a piece only need
//! `I_j = ∫_0^h u^j e^{-λu-κu²/2} du` for `j ≤ 4`, evaluated below in one
//! of four regimes chosen for accuracy.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use libm::erfc;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Positive Gauss–Legendre nodes and weights on [-1, 1], 8 points.
const GL8: [(f64, f64); 4] = [
    (0.18343464249564978, 0.36268378337836177),
    (0.525532409916329, 0.31370664587788705),
    (0.7966664774136267, 0.22238103445337434),
    (0.9602898564975362, 0.10122853629037669),
];

/// Positive Gauss–Legendre nodes and weights on [-1, 1], 16 points.
const GL16: [(f64, f64); 8] = [
    (0.09501250983763745, 0.18945061045506859),
    (0.2816035507792589, 0.1826034150449236),
    (0.45801677765722737, 0.16915651939500262),
    (0.6178762444026438, 0.14959598881657676),
    (0.755404408355003, 0.12462897125553403),
    (0.8656312023878318, 0.09515851168249259),
    (0.9445750230732326, 0.062253523938647706),
    (0.9894009349916499, 0.027152459411754037),
];

/// Pieces whose peak sits this far (in log units) below the global peak are
/// dropped; their relative contribution is below 1e-34.
const LOG_SKIP: f64 = 78.0;

/// `∫_0^h u^j e^{-λu-κu²/2} du` for `j = 0..=4`.
///
/// `h` may be infinite when `λ > 0` or `κ > 0`.
pub(crate) fn decay_moments(lam: f64, kap: f64, h: f64) -> [f64; 5] {
    debug_assert!(lam >= 0.0 && kap >= 0.0 && h > 0.0);
    let decay = if h.is_finite() { lam * h + 0.5 * kap * h * h } else { f64::INFINITY };
    if decay <= 0.5 {
        legendre(&GL8, lam, kap, h)
    } else if decay <= 4.0 {
        legendre(&GL16, lam, kap, h)
    } else if kap <= 0.01 * lam * lam {
        exponential_series(lam, kap, h)
    } else {
        truncated_normal(lam, kap, h)
    }
}

fn legendre(nodes: &[(f64, f64)], lam: f64, kap: f64, h: f64) -> [f64; 5] {
    let half = 0.5 * h;
    let mut out = [0.0; 5];
    for &(x, w) in nodes {
        for u in [half * (1.0 - x), half * (1.0 + x)] {
            let mut p = w * half * (-(lam * u + 0.5 * kap * u * u)).exp();
            for slot in out.iter_mut() {
                *slot += p;
                p *= u;
            }
        }
    }
    out
}

/// Expand `e^{-κu²/2}` in powers of κ and integrate each term against the
/// exponential. Only used for `κ ≤ λ²/100`, where the asymptotic series
/// reaches double precision long before its terms start growing.
fn exponential_series(lam: f64, kap: f64, h: f64) -> [f64; 5] {
    let rho = kap / (lam * lam);
    let mut terms = 0usize;
    if kap > 0.0 {
        let mut bound = 1.0;
        while terms < 60 {
            let n = (4 + 2 * terms) as f64;
            bound *= 0.5 * rho * (n + 1.0) * (n + 2.0) / (terms as f64 + 1.0);
            terms += 1;
            if bound < 1e-18 {
                break;
            }
        }
    }
    let nmax = 4 + 2 * terms;
    let p = lower_gamma_table(nmax, lam * h);
    let mut out = [0.0; 5];
    let mut lead = 1.0 / lam;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            lead *= k as f64 / lam;
        }
        let mut base = lead;
        let mut sum = 0.0;
        for j in 0..=terms {
            let n = k + 2 * j;
            if n > nmax {
                break;
            }
            sum += base * p[n];
            base *= -0.5 * kap / (j as f64 + 1.0) * ((n + 1) * (n + 2)) as f64 / (lam * lam);
        }
        *slot = sum;
    }
    out
}

/// `P[n]` = regularized lower incomplete gamma `P(n + 1, x)` for `n ≤ nmax`.
fn lower_gamma_table(nmax: usize, x: f64) -> Vec<f64> {
    let a = nmax + 1;
    if !x.is_finite() || x > 2.0 * a as f64 + 60.0 {
        return vec![1.0; a];
    }
    let mut p = vec![0.0; a];
    if x <= 0.0 {
        return p;
    }
    // P(a, x) by its convergent power series, then downward recursion
    // P(n, x) = P(n + 1, x) + e^{-x} x^n / n!, which only adds positives.
    let mut t = (-x + a as f64 * x.ln() - ln_factorial(a as u64)).exp();
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..2000 {
        term *= x / (a + k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    p[nmax] = (t * sum).min(1.0);
    for n in (0..nmax).rev() {
        t *= (n + 2) as f64 / x;
        p[n] = (p[n + 1] + t).min(1.0);
    }
    p
}

/// Rescale to `v = √κ u` and use the Gaussian tail plus the upward
/// recursion `K_{j+1} = j K_{j-1} - z K_j - H^j e^{-zH-H²/2} + [j = 0]`.
/// Only used with `z = λ/√κ ≤ 10`, which bounds the cancellation.
fn truncated_normal(lam: f64, kap: f64, h: f64) -> [f64; 5] {
    let sk = kap.sqrt();
    let z = lam / sk;
    let hh = h * sk;
    let lower_tail = erfc(z / SQRT_2);
    let (upper_tail, edge) = if hh.is_finite() {
        (erfc((z + hh) / SQRT_2), (-(z * hh + 0.5 * hh * hh)).exp())
    } else {
        (0.0, 0.0)
    };
    let mut k = [0.0; 5];
    k[0] = FRAC_PI_2.sqrt() * (0.5 * z * z).exp() * (lower_tail - upper_tail);
    k[1] = 1.0 - edge - z * k[0];
    let mut hp = hh;
    for j in 1..4 {
        let boundary = if edge > 0.0 { hp * edge } else { 0.0 };
        k[j + 1] = j as f64 * k[j - 1] - z * k[j] - boundary;
        hp *= hh;
    }
    let mut scale = 1.0 / sk;
    for kj in k.iter_mut() {
        *kj *= scale;
        scale /= sk;
    }
    k
}

/// One affine-density segment `[x0, x1]`. Under the tilt `(b, c)` it
/// carries the exponent `(c + shift)·x - b x²/2`; `shift` absorbs an
/// exponential density factor (Laplace). Infinite ends require `f0 == f1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Segment {
    pub x0: f64,
    pub x1: f64,
    pub f0: f64,
    pub f1: f64,
    pub shift: f64,
}

impl Segment {
    fn slope(&self) -> f64 {
        if self.x0.is_finite() && self.x1.is_finite() {
            (self.f1 - self.f0) / (self.x1 - self.x0)
        } else {
            0.0
        }
    }

    fn weight_at(&self, x: f64) -> f64 {
        if self.x0.is_finite() {
            self.f0 + self.slope() * (x - self.x0)
        } else {
            self.f1
        }
    }

    fn clip(&self, lo: f64, hi: f64) -> Option<Segment> {
        let x0 = self.x0.max(lo);
        let x1 = self.x1.min(hi);
        (x1 > x0).then(|| Segment {
            x0,
            x1,
            f0: self.weight_at(x0),
            f1: self.weight_at(x1),
            shift: self.shift,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    xp: f64,
    sigma: f64,
    h: f64,
    phi0: f64,
    lam: f64,
    fp: f64,
    g: f64,
    fmax: f64,
}

impl Piece {
    fn score(&self) -> f64 {
        self.phi0 + self.fmax.ln()
    }
}

fn push_pieces(seg: &Segment, b: f64, c: f64, out: &mut Vec<Piece>) -> Result<()> {
    let gamma = c + seg.shift;
    let fmax = seg.f0.max(seg.f1);
    if fmax <= 0.0 {
        return Ok(());
    }
    let phi = |x: f64| gamma * x - 0.5 * b * x * x;
    let slope = seg.slope();
    let mut add = |xp: f64, sigma: f64, h: f64, at_mode: bool| {
        let lam = if at_mode { 0.0 } else { (-sigma * (gamma - b * xp)).max(0.0) };
        out.push(Piece {
            xp,
            sigma,
            h,
            phi0: phi(xp),
            lam,
            fp: seg.weight_at(xp).max(0.0),
            g: sigma * slope,
            fmax,
        });
    };
    let not_integrable = Error::TiltNotIntegrable { b, c };
    if b > 0.0 {
        let mode = gamma / b;
        if mode > seg.x0 && mode < seg.x1 {
            add(mode, 1.0, seg.x1 - mode, true);
            add(mode, -1.0, mode - seg.x0, true);
        } else if mode <= seg.x0 {
            add(seg.x0, 1.0, seg.x1 - seg.x0, false);
        } else {
            add(seg.x1, -1.0, seg.x1 - seg.x0, false);
        }
    } else if gamma < 0.0 {
        if !seg.x0.is_finite() {
            return Err(not_integrable);
        }
        add(seg.x0, 1.0, seg.x1 - seg.x0, false);
    } else if gamma > 0.0 {
        if !seg.x1.is_finite() {
            return Err(not_integrable);
        }
        add(seg.x1, -1.0, seg.x1 - seg.x0, false);
    } else {
        if !(seg.x0.is_finite() && seg.x1.is_finite()) {
            return Err(not_integrable);
        }
        add(seg.x0, 1.0, seg.x1 - seg.x0, false);
    }
    Ok(())
}

/// Raw tilted sums about a reference point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TiltSums {
    /// Log of the common scale factored out of every sum.
    pub log_ref: f64,
    /// Expansion point of the moments.
    pub center: f64,
    /// `N_k = e^{-log_ref} ∫ (x - center)^k e^{cx-bx²/2} dμ` for k ≤ 3.
    pub n: [f64; 4],
}

/// Integrate the tilt over the given segments, optionally clipped to
/// `[lo, hi]`.
pub(crate) fn tilt_sums(
    segments: &[Segment],
    b: f64,
    c: f64,
    clip: Option<(f64, f64)>,
) -> Result<TiltSums> {
    let mut pieces = Vec::with_capacity(2 * segments.len());
    for seg in segments {
        let seg = match clip {
            Some((lo, hi)) => match seg.clip(lo, hi) {
                Some(s) => s,
                None => continue,
            },
            None => *seg,
        };
        push_pieces(&seg, b, c, &mut pieces)?;
    }
    let Some(best) = pieces.iter().max_by(|p, q| p.score().total_cmp(&q.score())) else {
        return Ok(TiltSums { log_ref: f64::NEG_INFINITY, center: 0.0, n: [0.0; 4] });
    };
    let log_ref = best.score();
    let center = best.xp;
    let mut n = [0.0; 4];
    for p in &pieces {
        let rel = p.score() - log_ref;
        if rel < -LOG_SKIP {
            continue;
        }
        let scale = rel.exp();
        let i = decay_moments(p.lam, b, p.h);
        let (fp, g) = (p.fp / p.fmax, p.g / p.fmax);
        let m = [
            fp * i[0] + g * i[1],
            fp * i[1] + g * i[2],
            fp * i[2] + g * i[3],
            fp * i[3] + g * i[4],
        ];
        let d = p.xp - center;
        let s = p.sigma;
        n[0] += scale * m[0];
        n[1] += scale * (d * m[0] + s * m[1]);
        n[2] += scale * (d * d * m[0] + 2.0 * d * s * m[1] + m[2]);
        n[3] += scale * (d * d * d * m[0] + 3.0 * d * d * s * m[1] + 3.0 * d * m[2] + s * m[3]);
    }
    Ok(TiltSums { log_ref, center, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force midpoint rule on a fine grid, for cross-checking.
    fn brute(lam: f64, kap: f64, h: f64) -> [f64; 5] {
        let h = if h.is_finite() { h } else { 60.0 / lam.max(kap.sqrt()) };
        let n = 400_000;
        let du = h / n as f64;
        let mut out = [0.0; 5];
        for i in 0..n {
            let u = (i as f64 + 0.5) * du;
            let mut p = du * (-(lam * u + 0.5 * kap * u * u)).exp();
            for slot in out.iter_mut() {
                *slot += p;
                p *= u;
            }
        }
        out
    }

    fn close(a: [f64; 5], b: [f64; 5], tol: f64) {
        for j in 0..5 {
            assert!((a[j] - b[j]).abs() <= tol * b[j].abs().max(1e-300), "j={j}: {} vs {}", a[j], b[j]);
        }
    }

    #[test]
    fn regimes_agree_with_brute_force() {
        let cases = [
            (0.1, 0.2, 1.0),
            (1.0, 1.0, 3.0),
            (3.0, 0.01, 5.0),
            (10.0, 0.5, f64::INFINITY),
            (0.0, 2.0, f64::INFINITY),
            (2.0, 0.0, f64::INFINITY),
            (2.0, 0.0, 4.0),
            (40.0, 1.0, 0.7),
            (0.5, 30.0, 0.9),
        ];
        for (lam, kap, h) in cases {
            close(decay_moments(lam, kap, h), brute(lam, kap, h), 1e-8);
        }
    }

    #[test]
    fn pure_exponential_tail() {
        let i = decay_moments(2.0, 0.0, f64::INFINITY);
        let expect = [0.5, 0.25, 0.25, 0.375, 0.75];
        close(i, expect, 1e-15);
    }

    #[test]
    fn half_gaussian() {
        let i = decay_moments(0.0, 1.0, f64::INFINITY);
        let r = FRAC_PI_2.sqrt();
        close(i, [r, 1.0, r, 2.0, 3.0 * r], 1e-14);
    }

    #[test]
    fn regime_boundaries_are_continuous() {
        // Straddle the switch between quadrature and the closed forms.
        for (lam, kap) in [(1.0f64, 0.5f64), (8.0, 0.0), (0.0, 8.0), (7.0, 0.3)] {
            let h0 = {
                // Solve λh + κh²/2 = 4.
                if kap > 0.0 {
                    (-lam + (lam * lam + 8.0 * kap).sqrt()) / kap
                } else {
                    4.0 / lam
                }
            };
            let below = decay_moments(lam, kap, h0 * (1.0 - 1e-9));
            let above = decay_moments(lam, kap, h0 * (1.0 + 1e-9));
            close(below, above, 1e-8);
        }
    }

    #[test]
    fn gamma_table_matches_closed_form() {
        let x = 3.7f64;
        let p = lower_gamma_table(6, x);
        for (n, pn) in p.iter().enumerate() {
            let a = n + 1;
            let mut q = 0.0;
            let mut t = (-x).exp();
            for k in 0..a {
                if k > 0 {
                    t *= x / k as f64;
                }
                q += t;
            }
            assert!((pn - (1.0 - q)).abs() < 1e-14);
        }
    }
}
