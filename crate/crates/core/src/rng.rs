//! Counter-based pseudo-random draws.
//!
//! Every stochastic decision in the simulator (transform noise, network drop
//! and jitter, Byzantine junk, random value selection) is a pure function of a
//! `(seed, index)` pair, so replays are bit-identical regardless of how events
//! interleave. The finalizer is the SplitMix64 mixing function.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective avalanche mix of one 64-bit word.
fn finalize(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent substream seed from a parent seed and a stream tag.
pub fn mix(seed: u64, stream: u64) -> u64 {
    finalize(seed ^ finalize(stream))
}

/// The `index`-th word of the stream identified by `seed`.
pub fn draw_u64(seed: u64, index: u64) -> u64 {
    finalize(seed.wrapping_add(index.wrapping_mul(GOLDEN)))
}

/// The `index`-th draw of the stream, uniform in `[0, 1)` with 53 random bits.
pub fn draw_unit(seed: u64, index: u64) -> f64 {
    (draw_u64(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[-bound, bound]`.
pub fn draw_symmetric(seed: u64, index: u64, bound: f64) -> f64 {
    bound * (2.0 * draw_unit(seed, index) - 1.0)
}
