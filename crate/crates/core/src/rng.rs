//! Seed derivation.
//!
//! Every random stream in a run is derived from the experiment's base seed
//! through a fixed 64-bit mixing function, so results never depend on thread
//! scheduling or on the standard library's hasher.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// Stream tags keep the environment and the learners on disjoint streams.
pub const STREAM_DEPLOYMENT: u64 = 0x6465_706c_6f79;
pub const STREAM_ENVIRONMENT: u64 = 0x656e_7669_726f;
pub const STREAM_AGENTS: u64 = 0x6167_656e_7473;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable hash of an ordered pair of 64-bit values.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b.rotate_left(32) ^ 0x5851_f42d_4c95_7f2d)
}

pub fn drop_seed(base_seed: u64, drop: usize) -> u64 {
    mix(base_seed, drop as u64)
}

pub fn agent_seed(drop_seed: u64, agent: usize) -> u64 {
    mix(mix(drop_seed, STREAM_AGENTS), agent as u64)
}

pub fn stream(seed: u64, tag: u64) -> SimRng {
    SimRng::seed_from_u64(mix(seed, tag))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
