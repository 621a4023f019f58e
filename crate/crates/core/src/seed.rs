//! Stable seed derivation for independent random streams.
//!
//! Experiments need one deterministic 64-bit seed per (cell, horizon,
//! granularity, trial) tuple, identical across platforms and releases. The
//! standard library hashers make no such stability promise, so seeds are
//! derived with SplitMix64 (Steele, Lea & Flood 2014), the same finalizer
//! `rand_core` uses for `seed_from_u64`.

/// Advances a SplitMix64 state and returns the next output word.
///
/// This is the reference algorithm: a Weyl sequence with increment
/// `0x9E3779B97F4A7C15` followed by a 64-bit mix finalizer.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a list of integer tags.
///
/// Each tag is absorbed by xoring it into the running state and advancing
/// SplitMix64 once, so `derive_seed(m, &[a, b])` and `derive_seed(m, &[b, a])`
/// differ. The empty tag list returns the mixed master seed itself.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag;
        out = splitmix64(&mut state);
    }
    out
}
