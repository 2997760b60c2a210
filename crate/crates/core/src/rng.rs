//! Per-replication random streams.
//!
//! Each replication gets its own PCG-XSH-RR generator (64-bit state, 32-bit
//! output). The replication index is run through SplitMix64 to pick the
//! stream selector, and mixed with the seed for the initial state, so a
//! replication's draws depend only on `(seed, index)` and never on which
//! worker runs it.

use rand_pcg::Pcg32;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for replication `index` under `seed`.
pub fn replication_stream(seed: u64, index: u64) -> Pcg32 {
    let selector = splitmix64(index);
    let state = splitmix64(seed ^ selector.rotate_left(17));
    Pcg32::new(state, selector)
}
