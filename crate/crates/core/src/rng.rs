//! Seed derivation for independent random substreams.
//!
//! Every consumer of randomness (a tree, the splitter, the generator) gets its
//! own ChaCha8 stream seeded by `mix(seed, stream_id)`, so results do not
//! depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id used by the stratified splitter. Trees use their index.
pub const SPLIT_STREAM: u64 = 0xA5A5_0000_0000_0001;
/// Stream id used by the synthetic generator.
pub const SYNTH_STREAM: u64 = 0xA5A5_0000_0000_0002;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(seed ^ splitmix64(stream))`
pub fn mix(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, stream_id))
}
