//! Sources of Brownian increments for the path simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Supplies `W(t + dt) - W(t)` along one path, plus auxiliary uniforms.
pub trait BrownianDriver {
    /// Increment over `[t, t + dt]`. Calls arrive with nondecreasing `t`.
    fn increment(&mut self, t: f64, dt: f64) -> f64;

    /// A uniform draw in `[0, 1)`, used for the bridge crossing test.
    fn uniform(&mut self) -> f64;
}

/// Independent Gaussian increments from the ChaCha stream `(seed, path_id)`.
#[derive(Debug, Clone)]
pub struct IncrementStream {
    rng: ChaCha8Rng,
}

impl IncrementStream {
    pub fn new(seed: u64, path_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_id);
        Self { rng }
    }
}

impl BrownianDriver for IncrementStream {
    fn increment(&mut self, _t: f64, dt: f64) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        dt.sqrt() * z
    }

    fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Depth of the dyadic refinement inside each unit time interval.
const LEVELS: u32 = 40;

/// A Brownian path fixed in advance by `(seed, path_id)` and queried at
/// arbitrary times.
///
/// `W` at integer times is a random walk; inside each unit interval the
/// path is built by Lévy's midpoint construction down to a spacing of
/// `2^-40` and interpolated linearly below that. Each node's normal is read
/// at a fixed position of the ChaCha stream, so the realization does not
/// depend on which times are queried or in which order. Two simulations
/// with different step sizes therefore see the same path.
#[derive(Debug, Clone)]
pub struct SharedPath {
    nodes: ChaCha8Rng,
    aux: ChaCha8Rng,
    integer_values: Vec<f64>,
    last: (f64, f64),
}

impl SharedPath {
    pub fn new(seed: u64, path_id: u64) -> Self {
        let mut nodes = ChaCha8Rng::seed_from_u64(seed);
        nodes.set_stream(path_id);
        let mut aux = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        aux.set_stream(path_id);
        Self { nodes, aux, integer_values: vec![0.0], last: (0.0, 0.0) }
    }

    /// Standard normal stored at node `index`, by Box–Muller on two words.
    fn node_normal(&mut self, index: u128) -> f64 {
        self.nodes.set_word_pos(index * 4);
        let u1: f64 = 1.0 - self.nodes.random::<f64>();
        let u2: f64 = self.nodes.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn at_integer(&mut self, k: usize) -> f64 {
        while self.integer_values.len() <= k {
            let j = self.integer_values.len() - 1;
            let z = self.node_normal((j as u128) << (LEVELS + 1));
            let next = self.integer_values[j] + z;
            self.integer_values.push(next);
        }
        self.integer_values[k]
    }

    /// The path value `W(t)` for `t ≥ 0`.
    pub fn value(&mut self, t: f64) -> f64 {
        assert!(t >= 0.0 && t.is_finite(), "SharedPath queried at t = {t}");
        let k = t.floor() as usize;
        let frac = t - k as f64;
        let mut wl = self.at_integer(k);
        let mut wh = self.at_integer(k + 1);
        if frac == 0.0 {
            return wl;
        }
        let base = (k as u128) << (LEVELS + 1);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut heap: u128 = 1;
        for _ in 0..LEVELS {
            let mid = 0.5 * (lo + hi);
            let z = self.node_normal(base | heap);
            let wm = 0.5 * (wl + wh) + 0.5 * (hi - lo).sqrt() * z;
            if frac < mid {
                hi = mid;
                wh = wm;
                heap *= 2;
            } else {
                lo = mid;
                wl = wm;
                heap = 2 * heap + 1;
            }
            if frac == lo {
                return wl;
            }
        }
        wl + (wh - wl) * (frac - lo) / (hi - lo)
    }
}

impl BrownianDriver for SharedPath {
    fn increment(&mut self, t: f64, dt: f64) -> f64 {
        let w0 = if self.last.0 == t { self.last.1 } else { self.value(t) };
        let t1 = t + dt;
        let w1 = self.value(t1);
        self.last = (t1, w1);
        w1 - w0
    }

    fn uniform(&mut self) -> f64 {
        self.aux.random::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = IncrementStream::new(7, 3);
        let mut b = IncrementStream::new(7, 3);
        let mut c = IncrementStream::new(7, 4);
        let xa: Vec<f64> = (0..5).map(|_| a.increment(0.0, 1.0)).collect();
        let xb: Vec<f64> = (0..5).map(|_| b.increment(0.0, 1.0)).collect();
        let xc: Vec<f64> = (0..5).map(|_| c.increment(0.0, 1.0)).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn shared_path_ignores_query_order() {
        let mut p = SharedPath::new(11, 2);
        let mut q = SharedPath::new(11, 2);
        let times = [0.3, 1.7, 0.01, 2.25, 0.3000001];
        let forward: Vec<f64> = times.iter().map(|t| p.value(*t)).collect();
        let backward: Vec<f64> = times.iter().rev().map(|t| q.value(*t)).collect();
        for (x, y) in forward.iter().zip(backward.iter().rev()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn shared_path_increments_telescope() {
        let mut coarse = SharedPath::new(5, 0);
        let mut fine = SharedPath::new(5, 0);
        let big = coarse.increment(0.0, 0.5);
        let small: f64 = (0..50).map(|i| fine.increment(i as f64 * 0.01, 0.01)).sum();
        assert!((big - small).abs() < 1e-9);
    }

    #[test]
    fn shared_path_has_brownian_variance() {
        // Var W(0.3) = 0.3 and Var[W(0.8) - W(0.3)] = 0.5 across paths.
        let n = 4000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for id in 0..n {
            let mut p = SharedPath::new(1, id);
            let a = p.value(0.3);
            let b = p.value(0.8);
            s1 += a * a;
            s2 += (b - a) * (b - a);
        }
        let (v1, v2) = (s1 / n as f64, s2 / n as f64);
        // Relative sd of a variance estimate is sqrt(2/n) ≈ 0.022.
        assert!((v1 / 0.3 - 1.0).abs() < 0.09, "{v1}");
        assert!((v2 / 0.5 - 1.0).abs() < 0.09, "{v2}");
    }
}
