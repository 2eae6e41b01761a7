//! Per-trial seed derivation.
//!
//! `seed_for_trial(base, t)` applies the splitmix64 finalizer to
//! `base + (t + 1) * 0x9E3779B97F4A7C15`. The finalizer is a bijection on
//! `u64` and the golden-ratio increment is odd, so distinct trial indices
//! under one base never collide. Results depend only on `(base, t)`, never on
//! how trials are scheduled.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seed_for_trial(base: u64, trial: u64) -> u64 {
    splitmix64(base.wrapping_add(trial.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
