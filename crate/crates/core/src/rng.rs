//! Seeded, portable randomness with an explicit stream contract.
//!
//! Everything random in this crate flows through [`Stream`], a ChaCha8 stream
//! cipher keyed from a single `u64` seed.  The key expansion and the bounded
//! sampler are spelled out here (rather than delegated to library helpers) so
//! the exact byte stream is pinned by this file and by the regression tests
//! below, independent of dependency upgrades:
//!
//! 1. The 32-byte ChaCha8 key is the little-endian concatenation of four
//!    outputs of the standard splitmix64 generator seeded with the `u64` seed.
//! 2. A bounded draw `next_below(n)` masks the low bits of successive
//!    `next_u64` words down to the smallest power of two ≥ `n` and rejects
//!    values ≥ `n`, so it is exactly uniform and never biased.
//! 3. Consumers draw in a documented order: vertex labels first (in vertex
//!    order), then plane resolutions for edges whose base edge sits on more
//!    than one plane (in edge order).  See `splitter::sample_labeling`.
//!
//! Batch runs derive one independent seed per trial with [`derive_seed`], a
//! splitmix64 finalizer over `master + index * golden`, so trial `i` can be
//! re-run in isolation by passing its derived seed back in.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-trial seed from a master seed and a trial index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix_finalize(master.wrapping_add(index.wrapping_mul(GOLDEN)).wrapping_add(GOLDEN))
}

/// Deterministic random word stream keyed by a `u64` seed.
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_mut(8) {
            state = state.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&splitmix_finalize(state).to_le_bytes());
        }
        Stream { rng: ChaCha8Rng::from_seed(key) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from `0..n` by masked rejection. `n` must be positive.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        if n == 1 {
            return 0;
        }
        let mask = u64::MAX >> (n - 1).leading_zeros();
        loop {
            let x = self.rng.next_u64() & mask;
            if x < n {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Stream::new(12345);
        let mut b = Stream::new(12345);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = Stream::new(1);
        let mut b = Stream::new(2);
        let same = (0..16).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn bounded_draws_in_range_and_cover() {
        let mut s = Stream::new(7);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            let x = s.next_below(7) as usize;
            assert!(x < 7);
            seen[x] = true;
        }
        assert!(seen.iter().all(|&b| b), "all residues hit in 1000 draws");
    }

    #[test]
    fn bounded_draws_roughly_uniform() {
        let mut s = Stream::new(99);
        let n = 5u64;
        let trials = 50_000;
        let mut counts = [0u64; 5];
        for _ in 0..trials {
            counts[s.next_below(n) as usize] += 1;
        }
        let expect = trials as f64 / n as f64;
        for &c in &counts {
            let dev = (c as f64 - expect).abs() / expect.sqrt();
            assert!(dev < 5.0, "count {c} deviates {dev:.1} sigma from {expect}");
        }
    }

    #[test]
    fn derived_seeds_distinct() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000 {
            assert!(seen.insert(derive_seed(42, i)), "collision at index {i}");
        }
    }

    #[test]
    fn derive_seed_is_index_addressable() {
        // Re-running trial 17 in isolation must see the same seed a batch saw.
        let batch: Vec<u64> = (0..32).map(|i| derive_seed(9, i)).collect();
        assert_eq!(batch[17], derive_seed(9, 17));
    }

    // Pinned outputs: fails if the documented key expansion, the rejection
    // sampling, the seed derivation, or the upstream cipher ever changes
    // behavior.  Reproducibility of recorded seeds depends on these exact
    // values, so a failure here is a compatibility break, not a test bug.
    #[test]
    fn stream_values_are_pinned() {
        let mut s = Stream::new(0);
        let first: Vec<u64> = (0..4).map(|_| s.next_u64()).collect();
        assert_eq!(
            first,
            [
                13804888775535289832,
                4211859015901796865,
                4415496932110364166,
                1713244878998487631,
            ]
        );

        let mut t = Stream::new(0xDEAD_BEEF);
        let below: Vec<u64> = (0..8).map(|_| t.next_below(10)).collect();
        assert_eq!(below, [4, 2, 3, 6, 3, 5, 6, 6]);

        let derived: Vec<u64> = (0..3).map(|i| derive_seed(42, i)).collect();
        assert_eq!(
            derived,
            [13679457532755275413, 2949826092126892291, 5139283748462763858]
        );
    }
}
