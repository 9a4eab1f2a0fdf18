//! Counter-based random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by
//! `(seed, purpose, replicate)`, so independent parts of an experiment never
//! share state and any single value can be regenerated in isolation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What a stream is used for. Distinct purposes give independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Purpose {
    Dither,
    PointSample,
    PoissonCount,
    WhiteNoise,
    Augmentation,
    Shuffle,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Dither => 1,
            Purpose::PointSample => 2,
            Purpose::PoissonCount => 3,
            Purpose::WhiteNoise => 4,
            Purpose::Augmentation => 5,
            Purpose::Shuffle => 6,
        }
    }
}

/// A fresh generator for the given key.
pub fn stream(seed: u64, purpose: Purpose, replicate: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.tag().to_le_bytes());
    key[16..24].copy_from_slice(&replicate.to_le_bytes());
    key[24..].copy_from_slice(b"aeq-rng\0");
    ChaCha8Rng::from_seed(key)
}

/// Maps 64 random bits to a uniform in `[0, 1)` on the 2^-53 grid.
#[inline]
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Dither uniforms `U_{k,l}` in `[-1/2, 1/2)`, addressed by dyadic index.
///
/// The value at `(k, l)` depends only on `(seed, replicate, k, l)`. Internally
/// the stream exposes `r = U + 1/2 in [0, 1)`, which is exact in binary and is
/// what the coupling routines consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DitherStream {
    pub seed: u64,
    pub replicate: u64,
}

impl DitherStream {
    pub fn new(seed: u64, replicate: u64) -> Self {
        Self { seed, replicate }
    }

    fn word_pos(k: u32, l: u64) -> u128 {
        2 * ((1u128 << k) + l as u128)
    }

    /// `U_{k,l} + 1/2`.
    pub fn offset(&self, k: u32, l: u64) -> f64 {
        let mut rng = stream(self.seed, Purpose::Dither, self.replicate);
        rng.set_word_pos(Self::word_pos(k, l));
        unit_from_bits(rng.next_u64())
    }

    /// `U_{k,l}` itself.
    pub fn value(&self, k: u32, l: u64) -> f64 {
        self.offset(k, l) - 0.5
    }

    /// Offsets `U_{k,l} + 1/2` for `l = 0..out.len()` at level `k`, drawn in
    /// one sequential pass; identical to calling [`Self::offset`] per cell.
    pub fn fill_offsets(&self, k: u32, out: &mut [f64]) {
        let mut rng = stream(self.seed, Purpose::Dither, self.replicate);
        rng.set_word_pos(Self::word_pos(k, 0));
        for slot in out.iter_mut() {
            *slot = unit_from_bits(rng.next_u64());
        }
    }
}
