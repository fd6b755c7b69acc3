//! Deterministic random streams.
//!
//! Sequential draws use ChaCha8 seeded from `(seed, stream)`. Edge coins use
//! a counter-based hash of `(seed, stream, i, j)` so that any subset of vertex
//! pairs can be sampled independently and still agree with the full sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Well-known stream ids keep unrelated draws from sharing randomness.
pub mod stream {
    pub const LATENTS: u64 = 1;
    pub const EDGES: u64 = 2;
    pub const SHUFFLE: u64 = 3;
    pub const CLOSURE: u64 = 4;
    pub const COVARIATES: u64 = 5;
    pub const REPLICATES: u64 = 6;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a tuple of words, mixing each one in turn.
#[inline]
pub fn hash_words(words: &[u64]) -> u64 {
    let mut h = 0x6A09_E667_F3BC_C909u64;
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

/// Child seed for `(seed, stream, index)`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    hash_words(&[seed, stream, index])
}

/// A ChaCha8 generator for `(seed, stream, index)`.
pub fn chacha(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

/// Uniform value in `[0, 1)` attached to the unordered pair `{i, j}`.
#[inline]
pub fn pair_uniform(seed: u64, stream: u64, i: usize, j: usize) -> f64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let h = hash_words(&[seed, stream, a as u64, b as u64]);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
