//! Seeded, splittable random streams built on the ChaCha8 stream cipher.
//!
//! ChaCha is a counter-mode generator: the keystream at any position is a pure
//! function of `(key, stream id, block counter)`. A [`StreamKey`] fixes the key
//! and stream id, so a worker can regenerate any Gaussian functional, and any
//! coordinate of it, without coordinating with other workers.
//!
//! Gaussian coordinates are produced by Box–Muller from one 128-bit block pair:
//! coordinates `2c` and `2c + 1` of a stream share the four 32-bit words starting
//! at word position `4c`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = std::f64::consts::TAU;
const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Domain tags keep the streams used for different purposes disjoint.
pub mod tag {
    pub const FUNCTIONAL: u64 = 0x46554e43;
    pub const GENERATOR: u64 = 0x47454e52;
    pub const NOISE: u64 = 0x4e4f4953;
    pub const MONTE_CARLO: u64 = 0x4d434152;
    pub const TRIAL: u64 = 0x54524941;
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `(seed, tag, index)`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ mix64(tag)) ^ mix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// Identifies one keystream: a key derived from the seed plus a stream number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub stream: u64,
}

impl StreamKey {
    pub fn new(seed: u64, stream: u64) -> Self {
        StreamKey { seed, stream }
    }

    /// Generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Fills `out` with coordinates `0..out.len()` of the Gaussian vector on this stream.
    pub fn fill_gaussian(&self, out: &mut [f64]) {
        let mut rng = self.rng();
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = box_muller(rng.gen(), rng.gen());
            pair[0] = a;
            pair[1] = b;
        }
        if let [last] = chunks.into_remainder() {
            *last = box_muller(rng.gen(), rng.gen()).0;
        }
    }

    /// Coordinate `c` of the Gaussian vector on this stream, by random access.
    pub fn gaussian_at(&self, c: u64) -> f64 {
        let mut rng = self.rng();
        rng.set_word_pos(u128::from(c / 2) * 4);
        let (a, b) = box_muller(rng.gen(), rng.gen());
        if c % 2 == 0 {
            a
        } else {
            b
        }
    }
}

fn box_muller(w0: u64, w1: u64) -> (f64, f64) {
    // u1 in (0, 1] so the logarithm is finite
    let u1 = ((w0 >> 11) + 1) as f64 * INV_2_53;
    let u2 = (w1 >> 11) as f64 * INV_2_53;
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (TWO_PI * u2).sin_cos();
    (r * c, r * s)
}

/// Generator for miscellaneous sampling keyed by `(seed, tag, index)`.
pub fn substream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, index))
}
