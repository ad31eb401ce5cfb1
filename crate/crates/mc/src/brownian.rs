//! Brownian paths on dyadic grids, built level by level with the Brownian
//! bridge from counter-based random streams.
//!
//! The normals of level `l` for noise slot `s` on path `p` come from a
//! ChaCha8 stream keyed by `(seed, s, l)` with stream number `p`, so a path
//! is the same whichever thread computes it and whatever finer levels are
//! requested later.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn stream(seed: u64, path: u64, slot: u32, level: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&slot.to_le_bytes());
    key[12..16].copy_from_slice(&level.to_le_bytes());
    key[16..24].copy_from_slice(b"brownian");
    let mut r = ChaCha8Rng::from_seed(key);
    r.set_stream(path);
    r
}

#[derive(Clone, Copy, Debug)]
pub struct BrownianSampler {
    pub seed: u64,
    pub horizon: f64,
}

impl BrownianSampler {
    /// Values `W(j T / 2^level)`, `j = 0..=2^level`, with `W(0) = 0`.
    pub fn sample(&self, path: u64, slot: u32, level: u32) -> Vec<f64> {
        let n = 1usize << level;
        let mut w = vec![0.0; n + 1];
        let mut r = stream(self.seed, path, slot, 0);
        let z: f64 = r.sample(StandardNormal);
        w[n] = self.horizon.sqrt() * z;
        for l in 1..=level {
            let half = n >> l;
            let parent = self.horizon / (1u64 << (l - 1)) as f64;
            let sd = (parent / 4.0).sqrt();
            let mut r = stream(self.seed, path, slot, l);
            let mut j = half;
            while j < n {
                let z: f64 = r.sample(StandardNormal);
                w[j] = 0.5 * (w[j - half] + w[j + half]) + sd * z;
                j += 2 * half;
            }
        }
        w
    }
}

/// Increments of several noises at a chosen resolution of sampled paths.
#[derive(Clone, Copy, Debug)]
pub struct PathView<'a> {
    pub values: &'a [Vec<f64>],
    /// Index stride from view cells to sampled points.
    pub stride: usize,
    /// Time length of one view cell.
    pub dt: f64,
}

impl PathView<'_> {
    #[inline]
    pub fn incr(&self, slot: usize, i0: usize, i1: usize) -> f64 {
        let w = &self.values[slot];
        w[i1 * self.stride] - w[i0 * self.stride]
    }

    pub fn cells(&self) -> usize {
        (self.values.first().map_or(1, |v| v.len()) - 1) / self.stride
    }
}
