//! Randomness used throughout the crate.
//!
//! Two generators are fixed so that every experiment replays bit-for-bit on
//! any platform:
//!
//! * **SplitMix64, counter form.** Per-vertex coins, Bernoulli streams and
//!   seed derivation. The value at counter `i` under key `k` is
//!   `mix64(mix64(k) + (i + 1) * GAMMA)`, which is exactly the `i`-th output
//!   of a SplitMix64 generator seeded with `mix64(k)`. Random access by index
//!   is what lets a vertex's coin be drawn lazily at its first query while
//!   staying identical to an up-front sample.
//! * **ChaCha8** (`rand_chacha::ChaCha8Rng::seed_from_u64`). Sequential
//!   draws: stub shuffles in the configuration model, edge swaps, random
//!   vertex orders and random test subsets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The `index`-th SplitMix64 output under `key`.
#[inline]
pub fn counter_u64(key: u64, index: u64) -> u64 {
    mix64(mix64(key).wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// Folds a list of indices into a base seed. Used for per-trial seeds:
/// `derive_seed(base, &[p_index, trial])`.
pub fn derive_seed(base: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(mix64(base), |acc, &i| mix64(acc ^ counter_u64(acc, i)))
}

pub fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A probability in `[0, 1]` together with its fixed 64-bit comparison
/// threshold: a raw draw `x` is heads iff `x < threshold` (or always, for
/// `p = 1`). The conversion happens once, so repeated trials at the same `p`
/// compare against the identical integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability {
    value: f64,
    threshold: u64,
    certain: bool,
}

impl Probability {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!("probability {p} outside [0, 1]")));
        }
        // 2^64 as f64 is exact; the cast saturates, and p < 1 keeps it below.
        let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
        Ok(Probability {
            value: p,
            threshold,
            certain: p >= 1.0,
        })
    }

    /// `(1 + delta) / d`, used for `p = (1 ± ε)/d`.
    pub fn around_critical(d: usize, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("degree must be positive"));
        }
        Probability::new((1.0 + delta) / d as f64)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn heads(&self, raw: u64) -> bool {
        self.certain || raw < self.threshold
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Probability::new(p)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.value
    }
}

/// `len` i.i.d. Bernoulli(p) bits from the counter generator under `seed`.
pub fn bernoulli_bits(p: Probability, seed: u64, len: usize) -> Vec<bool> {
    (0..len as u64)
        .map(|i| p.heads(counter_u64(seed, i)))
        .collect()
}
