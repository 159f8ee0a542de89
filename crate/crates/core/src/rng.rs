//! Seed derivation and PRNG streams.
//!
//! All randomness comes from ChaCha8 seeded with a 64-bit value. Independent
//! components of one draw (positions, edges, monitor roles) use distinct
//! ChaCha stream ids so each can be reproduced on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_EDGES: u64 = 1;
pub const STREAM_POSITIONS: u64 = 2;
pub const STREAM_MONITORS: u64 = 3;
pub const STREAM_CALIBRATION: u64 = 4;
pub const STREAM_INSTANCE: u64 = 5;

/// ChaCha8 generator for `seed` on the given stream.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of instance `index` of `model` under the run seed `base`.
pub fn instance_seed(base: u64, model: &str, index: u64) -> u64 {
    splitmix(splitmix(base ^ fnv1a(model.as_bytes())).wrapping_add(index))
}
