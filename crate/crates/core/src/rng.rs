//! Counter-based random streams for reproducible parallel simulation.
//!
//! Every stream is ChaCha8 keyed by the 64-bit study seed, with the 64-bit
//! ChaCha stream id packing `(block, replication, purpose)`:
//!
//! ```text
//! bits 63..48  block (grid point of a sweep, 0 for a single study)
//! bits 47..1   replication index
//! bit  0       purpose (0 = lifetimes, 1 = censoring values)
//! ```
//!
//! Streams for different ids never overlap, so results do not depend on how
//! replications are scheduled across workers.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub const MAX_REPLICATIONS: u64 = 1 << 47;
pub const MAX_BLOCKS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Lifetimes = 0,
    Censoring = 1,
}

pub fn stream(seed: u64, block: u64, replication: u64, purpose: Purpose) -> ChaCha8Rng {
    assert!(block < MAX_BLOCKS, "block {block} out of range");
    assert!(replication < MAX_REPLICATIONS, "replication {replication} out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((block << 48) | (replication << 1) | purpose as u64);
    rng
}

/// Uniform draw on the open interval (0, 1): `(k + 1/2) / 2^52` for the top
/// 52 bits `k` of one 64-bit output.
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal draw by inversion of the normal CDF.
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u = open_unit(rng);
    Normal::standard().inverse_cdf(u)
}
