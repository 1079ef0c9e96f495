//! Seed derivation. Every random stream in a run is a pure function of the
//! plan seed and the stream's coordinates, so scheduling never changes output.

const HOST: u64 = 0x686f_7374;
const MESSAGE: u64 = 0x6d73_6721;
const NOISE: u64 = 0x6e6f_6973;

/// splitmix64 finalizer applied to `a ^ b`-style combinations.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a.wrapping_add(b.wrapping_mul(0x9e37_79b9_7f4a_7c15)).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Host realization for a trial. Shared by every cell so curves are
/// compared on the same hosts.
pub fn host_seed(plan_seed: u64, trial: usize) -> u64 {
    mix(mix(plan_seed, HOST), trial as u64)
}

pub fn message_seed(plan_seed: u64, trial: usize) -> u64 {
    mix(mix(plan_seed, MESSAGE), trial as u64)
}

pub fn noise_seed(plan_seed: u64, cell: usize, trial: usize) -> u64 {
    mix(mix(mix(plan_seed, NOISE), cell as u64), trial as u64)
}
