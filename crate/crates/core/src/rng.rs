//! Reproducible random streams.
//!
//! Every trajectory owns an independent ChaCha8 stream keyed by
//! `(base_seed, trajectory_id)`. ChaCha is counter-based, so streams are
//! cheap to construct, independent of scheduling, and identical across
//! thread counts — divergence experiments are tail-event statistics and
//! must replay bit-for-bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// An independent stream for one trajectory of one ensemble.
pub fn trajectory_stream(base_seed: u64, trajectory_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trajectory_id);
    rng
}

/// A stream for auxiliary sampling (certification, oracles), kept away from
/// trajectory ids by a fixed offset in the stream space.
pub fn oracle_stream(seed: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}
