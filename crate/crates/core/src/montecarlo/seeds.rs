//! Per-trial seed derivation.
//!
//! Seeds come from a counter-based mix so any trial can be regenerated from
//! `(master, index)` alone, whatever the sharding:
//!
//! * robber seed: `mix(master, index)`
//! * cop seed: `mix(mix(master, COP_DOMAIN ^ C), index)`
//!
//! where `mix(a, b) = splitmix64(a ^ splitmix64(b))` and `C` is the cop
//! count. Robber seeds ignore `C`, so runs at different cop counts share the
//! robber's randomness (common random numbers) while the cops get fresh
//! streams.

use crate::game::TrialSeeds;

const COP_DOMAIN: u64 = 0xC0C0_0000_0000_0000;

/// The splitmix64 finalizer applied to `x + golden gamma`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

pub fn trial_seeds(master: u64, cop_count: u32, index: u64) -> TrialSeeds {
    TrialSeeds {
        cop: mix(mix(master, COP_DOMAIN ^ cop_count as u64), index),
        robber: mix(master, index),
    }
}
