//! Globally adaptive Gauss–Kronrod (7/15) integration of tilted moments.
//!
//! This is the slow, general route. It only needs the log of the integrand
//! and a list of break points (kinks and peaks), and serves as an
//! independent cross-check of the closed-form segment engine.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: [f64; 4],
    err0: f64,
    err2: f64,
}

fn gk15(f: &impl Fn(f64) -> [f64; 4], lo: f64, hi: f64) -> Panel {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kron = [0.0; 4];
    let mut gauss = [0.0; 4];
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let points: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
        for &t in points {
            let v = f(mid + half * t);
            for k in 0..4 {
                kron[k] += wk * v[k];
                if i % 2 == 1 {
                    gauss[k] += WG[i / 2] * v[k];
                }
            }
        }
    }
    for k in 0..4 {
        kron[k] *= half;
        gauss[k] *= half;
    }
    Panel {
        lo,
        hi,
        value: kron,
        err0: (kron[0] - gauss[0]).abs(),
        err2: (kron[2] - gauss[2]).abs(),
    }
}

/// `∫ e^{ℓ(x) - log_ref} (x - center)^k dx`, `k ≤ 3`, over `[breaks[0], breaks[last]]`.
///
/// Refinement stops once the estimated errors of the zeroth and second
/// sums are both below `rel_tol` times their values.
pub(crate) fn adaptive_sums(
    log_integrand: impl Fn(f64) -> f64,
    breaks: &[f64],
    center: f64,
    log_ref: f64,
    rel_tol: f64,
) -> Result<[f64; 4]> {
    let f = |x: f64| {
        let e = (log_integrand(x) - log_ref).exp();
        let d = x - center;
        [e, e * d, e * d * d, e * d * d * d]
    };
    let mut panels: Vec<Panel> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let step = (w[1] - w[0]) / 4.0;
        for i in 0..4 {
            let lo = w[0] + i as f64 * step;
            let hi = if i == 3 { w[1] } else { lo + step };
            panels.push(gk15(&f, lo, hi));
        }
    }
    loop {
        let mut total = [0.0; 4];
        let (mut e0, mut e2) = (0.0, 0.0);
        for p in &panels {
            for k in 0..4 {
                total[k] += p.value[k];
            }
            e0 += p.err0;
            e2 += p.err2;
        }
        let ok0 = e0 <= rel_tol * total[0].abs();
        let ok2 = e2 <= rel_tol * total[2].abs();
        if ok0 && ok2 {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            let achieved = (e0 / total[0].abs()).max(e2 / total[2].abs());
            return Err(Error::QuadratureFailure { target: rel_tol, achieved });
        }
        // Split the panel contributing the most (scaled) error.
        let s0 = if total[0] != 0.0 { 1.0 / total[0].abs() } else { 1.0 };
        let s2 = if total[2] != 0.0 { 1.0 / total[2].abs() } else { 1.0 };
        let (worst, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.err0 * s0 + p.err2 * s2))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            let achieved = (e0 / total[0].abs()).max(e2 / total[2].abs());
            return Err(Error::QuadratureFailure { target: rel_tol, achieved });
        }
        panels.push(gk15(&f, p.lo, mid));
        panels.push(gk15(&f, mid, p.hi));
    }
}

/// Walk outward from `peak` until the log integrand has dropped by `drop`,
/// doubling the step each time. Returns the point reached, clipped to `limit`.
pub(crate) fn find_cutoff(log_integrand: &impl Fn(f64) -> f64, peak: f64, dir: f64, scale: f64, drop: f64, limit: f64) -> f64 {
    let top = log_integrand(peak);
    let mut step = scale.max(1e-300);
    for _ in 0..2000 {
        let x = peak + dir * step;
        if (dir > 0.0 && x >= limit) || (dir < 0.0 && x <= limit) {
            return limit;
        }
        if log_integrand(x) < top - drop {
            return x;
        }
        step *= 2.0;
    }
    limit
}
