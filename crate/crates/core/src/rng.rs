//! Reproducible random streams.
//!
//! Every replicate of a campaign draws from its own ChaCha8 stream. The
//! replicate seed is the first word of the ChaCha8 keystream keyed by the
//! master seed and selected by `stream = replicate index`, so the seed of
//! replicate `i` depends only on `(master, i)`, never on scheduling or on the
//! number of worker threads. The seed is then fed to [`seeded`] to obtain the
//! generator for that replicate, which lets any single replicate be re-run in
//! isolation from its recorded seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for a single replicate (or any standalone draw).
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counter-based split: seed of replicate `index` under `master`.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Uniform integer in `[0, bound)` without modulo bias.
///
/// Lemire's multiply-and-reject: the low word of `x * bound` falls in the
/// biased zone `[0, 2^32 mod bound)` with probability < bound / 2^32, and those
/// draws are rejected.
#[inline]
pub fn bounded_u32<R: RngCore + ?Sized>(rng: &mut R, bound: u32) -> u32 {
    assert!(bound > 0, "bounded_u32 needs a positive bound");
    let mut m = u64::from(rng.next_u32()) * u64::from(bound);
    let mut low = m as u32;
    if low < bound {
        let zone = bound.wrapping_neg() % bound;
        while low < zone {
            m = u64::from(rng.next_u32()) * u64::from(bound);
            low = m as u32;
        }
    }
    (m >> 32) as u32
}

/// Bernoulli(p) draw; exact at p = 0 and p = 1.
#[inline]
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        return false;
    }
    if p >= 1.0 {
        return true;
    }
    // 53-bit uniform in [0, 1)
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < p
}
