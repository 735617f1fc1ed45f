//! Seed derivation, counter-based coins and replicate runners.
//!
//! Every random stream in the crate is keyed by integers: a master seed, a
//! replicate index, a stream tag and (for coins) an event and coin index.
//! Keys are combined with the SplitMix64 finaliser, so any stream can be
//! rebuilt from its key without replaying the others.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used by all simulations.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under `master`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master ^ GOLDEN).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Seed of the `index`-th member of the stream family `tag` below `seed`.
#[inline]
pub fn stream_seed(seed: u64, tag: u64, index: u64) -> u64 {
    derive_seed(derive_seed(seed, tag), index)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Maps 64 random bits onto `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The infinite coin vector `u_1, u_2, …` attached to one reproduction event.
///
/// Coin `j` is the `j`-th output of a SplitMix64 stream started at `key`, so
/// it can be read in any order and any number of times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventCoins {
    key: u64,
}

impl EventCoins {
    pub fn new(key: u64) -> Self {
        Self { key }
    }

    /// Coins of event `event` in the run seeded by `seed`.
    pub fn for_event(seed: u64, event: u64) -> Self {
        Self::new(stream_seed(seed, 0xC015, event))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Coin `j` (1-based, as levels are).
    #[inline]
    pub fn coin(&self, j: usize) -> f64 {
        unit_f64(mix64(self.key.wrapping_add((j as u64).wrapping_mul(GOLDEN))))
    }

    pub fn take(&self, count: usize) -> Vec<f64> {
        (1..=count).map(|j| self.coin(j)).collect()
    }
}

/// Executes `count` independent replicates and returns results in index
/// order. Implementations may run replicates concurrently but must not
/// change the result.
pub trait ReplicateRunner {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs replicates one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl ReplicateRunner for Serial {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coins_are_pure_functions_of_key_and_index() {
        let a = EventCoins::for_event(7, 3);
        let b = EventCoins::for_event(7, 3);
        assert_eq!(a.coin(5), b.coin(5));
        assert_eq!(a.take(10), b.take(10));
        assert_ne!(a.coin(1), a.coin(2));
        assert_ne!(EventCoins::for_event(7, 4).coin(1), a.coin(1));
        assert_ne!(EventCoins::for_event(8, 3).coin(1), a.coin(1));
    }

    #[test]
    fn coins_look_uniform() {
        let coins = EventCoins::for_event(11, 0);
        let n = 100_000;
        let mut sum = 0.0;
        let mut below_quarter = 0usize;
        for j in 1..=n {
            let u = coins.coin(j);
            assert!((0.0..1.0).contains(&u));
            sum += u;
            if u < 0.25 {
                below_quarter += 1;
            }
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 3.0 * (1.0f64 / 12.0 / n as f64).sqrt() + 1e-3);
        let frac = below_quarter as f64 / n as f64;
        assert!((frac - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: Vec<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
    }
}
