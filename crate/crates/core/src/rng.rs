//! Deterministic counter-based random streams.
//!
//! Every Monte Carlo sample draws from its own generator, derived as a pure
//! function of `(seed, experiment, sample index)`. Workers can therefore pick
//! up sample indices in any order, on any number of threads, and still produce
//! bit-identical output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; full-avalanche 64-bit mix.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Identifies one family of per-index streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    seed: u64,
    experiment: u64,
}

impl StreamKey {
    pub fn new(seed: u64, experiment: u64) -> Self {
        StreamKey { seed, experiment }
    }

    /// Generator for sample `index`. Derivation is stateless, so calls may
    /// happen in any order and from any thread.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut state = mix64(self.seed.wrapping_add(GOLDEN));
        state = mix64(state ^ self.experiment.wrapping_mul(GOLDEN));
        state = mix64(state ^ index.wrapping_mul(GOLDEN));
        let mut seed_bytes = [0u8; 32];
        for chunk in seed_bytes.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed_bytes)
    }

    /// A sub-key for an auxiliary purpose (e.g. bootstrap resampling) that
    /// must not collide with sample streams.
    pub fn derive(&self, tag: u64) -> StreamKey {
        StreamKey {
            seed: mix64(self.seed ^ tag.wrapping_mul(GOLDEN)),
            experiment: self.experiment,
        }
    }
}

/// FNV-1a over a byte string; used to fold config text into an experiment id.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
