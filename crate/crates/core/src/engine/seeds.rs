//! Deterministic seed derivation.
//!
//! Every random stream in a simulation is seeded as a pure function of the
//! scenario's base seed, a purpose tag, and an entity index. Streams are
//! therefore independent of each other and of consumption order: the traffic
//! stream of station 7 yields the same draws whether or not agents run,
//! which is what makes paired static/adaptive runs share traffic
//! realizations exactly.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Node and station placement during scenario generation.
pub const STREAM_PLACEMENT: u64 = 1;
/// Initial channel assignment during scenario generation.
pub const STREAM_CHANNELS: u64 = 2;
/// Per-station traffic generator (index = station id).
pub const STREAM_TRAFFIC: u64 = 3;
/// Per-node agent sampling (index = global node id).
pub const STREAM_AGENT: u64 = 4;

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from `(base, tag, index)`.
pub fn derive(base: u64, tag: u64, index: u64) -> u64 {
    mix(mix(mix(base) ^ tag) ^ index)
}

/// A counter-based RNG on the derived stream.
pub fn stream_rng(base: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, tag, index))
}
