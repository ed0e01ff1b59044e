//! Deterministic randomness.
//!
//! Every stream is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded
//! through `SeedableRng::seed_from_u64`. The ChaCha keystream is specified
//! bit-for-bit and `rand_chacha` guarantees value stability across platforms,
//! so a given seed reproduces the same draws everywhere.
//!
//! Parallel stages never share a stream: they derive child seeds with
//! [`derive_seed`], a SplitMix64 mix of the parent seed and a tag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed for stream `tag` under `parent`.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    splitmix64(parent ^ splitmix64(tag.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Derive along a path of tags, e.g. `(participant, session, trial)`.
pub fn derive_path(parent: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(parent, |s, &t| derive_seed(s, t))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn draws(seed: u64) -> Vec<u64> {
        let mut r = seeded_rng(seed);
        (0..10).map(|_| r.next_u64()).collect()
    }

    #[test]
    fn same_seed_same_stream() {
        assert_eq!(draws(0), draws(0));
    }

    #[test]
    fn different_seeds_differ() {
        assert_ne!(draws(0), draws(1));
    }

    #[test]
    fn pinned_reference_draw() {
        // Recorded once from ChaCha8Rng::seed_from_u64(42).next_u64().
        assert_eq!(seeded_rng(42).next_u64(), PINNED_SEED_42);
    }

    const PINNED_SEED_42: u64 = 12_578_764_544_318_200_737;

    #[test]
    fn child_seeds_are_distinct() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert!(a != b && a != c && b != c);
        assert_eq!(derive_path(7, &[1, 2, 3]), derive_path(7, &[1, 2, 3]));
        assert_ne!(derive_path(7, &[1, 2, 3]), derive_path(7, &[1, 3, 2]));
    }
}
