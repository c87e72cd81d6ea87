use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Seeded random stream.
///
/// The uniform source is ChaCha8 keyed by the 64-bit seed; doubles take the
/// top 53 bits of each 64-bit word. Gaussians come from the Box-Muller
/// transform (the second variate of each pair is cached). Both choices are
/// fixed so that a seed reproduces the same sequence on every platform.
///
/// A `Rng` is not shareable across threads; parallel work derives one per
/// task from [`derive_seed`].
pub struct Rng {
    core: ChaCha8Rng,
    seed: u64,
    spare_gauss: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            core: ChaCha8Rng::seed_from_u64(seed),
            seed,
            spare_gauss: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on [0, 1): top 53 bits scaled by 2^-53.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval (0, 1); safe to pass through `ln`.
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw via Box-Muller on two fresh uniforms.
    pub fn standard_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gauss.take() {
            return z;
        }
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_gauss = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Draw from N(mean, std^2). `std = 0` returns `mean` exactly without
    /// consuming stream state.
    pub fn gaussian(&mut self, mean: f64, std: f64) -> Result<f64> {
        if !(std >= 0.0) || !std.is_finite() || !mean.is_finite() {
            return Err(Error::Domain(format!(
                "gaussian needs finite mean and std >= 0, got ({mean}, {std})"
            )));
        }
        if std == 0.0 {
            return Ok(mean);
        }
        Ok(mean + std * self.standard_gaussian())
    }

    /// Uniform integer in [0, n) by the multiply-shift method. The bias is
    /// below n/2^64, negligible at the sizes used here.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Fisher-Yates shuffle driven by this stream.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }

    /// `k` distinct indices drawn from [0, n), in ascending order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut idx: Vec<usize> = (0..n).collect();
        // Partial Fisher-Yates: only the first k positions are needed.
        for i in 0..k {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }
}

/// SplitMix64 finalizer; used to decorrelate derived seeds.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Stable per-task seed: FNV-1a over `(master, label, a, b)` followed by a
/// SplitMix64 finalizer. Independent tasks in a sweep each own the stream
/// derived from their coordinates, so execution order never matters.
pub fn derive_seed(master: u64, label: &str, a: u64, b: u64) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    h = fnv1a(h, label.as_bytes());
    h = fnv1a(h, &a.to_le_bytes());
    h = fnv1a(h, &b.to_le_bytes());
    splitmix64(h)
}
