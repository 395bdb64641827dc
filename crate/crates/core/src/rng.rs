//! Seeding and random streams.
//!
//! Every run owns a `ChaCha8Rng` (a counter-based stream cipher generator
//! with a portable output sequence). Per-run seeds come from
//! [`derive_seed`], which mixes the master seed and the run index with the
//! SplitMix64 finalizer, so a run's stream depends only on
//! `(master_seed, run_index)` and never on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `splitmix64(master ^ splitmix64(index))`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn run_rng(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in `[0, 1)` from the top 53 bits of one `u64` draw.
#[inline]
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `[0, bound)` by 128-bit multiply-shift (one draw, bias < 2^-64 * bound).
#[inline]
pub fn below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    ((rng.next_u64() as u128 * bound as u128) >> 64) as u64
}
