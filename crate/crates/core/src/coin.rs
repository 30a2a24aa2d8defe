//! Shared public randomness. Every random decision is a pure function of
//! (seed, stream, index), so any machine can evaluate any coin locally.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub mod stream {
    pub const TZ_LEVEL: u64 = 1 << 40;
    pub const HOPSET: u64 = 2 << 40;
    pub const SPANNER: u64 = 3 << 40;
    pub const RESEED: u64 = 4 << 40;
    pub const GENERATOR: u64 = 5 << 40;
}

pub fn word(seed: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}

/// Uniform in [0, 1).
pub fn unit(seed: u64, stream: u64, index: u64) -> f64 {
    (word(seed, stream, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn bernoulli(seed: u64, stream: u64, index: u64, p: f64) -> bool {
    unit(seed, stream, index) < p
}

/// Seed for retry number `attempt` of a randomized construction.
pub fn derive(seed: u64, attempt: u64) -> u64 {
    if attempt == 0 {
        seed
    } else {
        word(seed, stream::RESEED, attempt)
    }
}

/// Sequential generator for graph generators.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let mut r = rng(7, 3);
        for i in 0..20 {
            assert_eq!(word(7, 3, i), r.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        assert_ne!(word(1, 0, 0), word(1, 1, 0));
        assert_eq!(derive(9, 0), 9);
        assert_ne!(derive(9, 1), 9);
    }
}
