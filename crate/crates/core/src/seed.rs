//! Per-job seed derivation.
//!
//! Every independent chain gets `derive_seed(master, tags)`, where `tags`
//! names the job (repetition, sample size, δ index, ...). The mixer is the
//! splitmix64 finalizer applied after folding each tag in, so neighbouring
//! tags give unrelated streams and the result does not depend on scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = mix(master.wrapping_add(GOLDEN));
    for &t in tags {
        state = mix(state ^ mix(t.wrapping_add(GOLDEN)).wrapping_add(GOLDEN));
    }
    state
}
