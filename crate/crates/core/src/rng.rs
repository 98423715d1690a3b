//! Counter-based random substreams.
//!
//! A stream is identified by `(master seed, label, index, step)`. The tuple is
//! hashed with the SplitMix64 finalizer into a 64-bit key that seeds a
//! Xoshiro256++ generator, so each walker/sample/step owns an independent
//! stream and results do not depend on how work is partitioned.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

/// Fixed stream labels; one per consumer.
pub mod label {
    pub const WALKER_INIT: u64 = 0x5741_4c4b_494e_4954;
    pub const WALKER_STEP: u64 = 0x5741_4c4b_5354_4550;
    pub const SUPERPOSITION: u64 = 0x5355_5045_5250_4f53;
    pub const COLLAPSE: u64 = 0x434f_4c4c_4150_5345;
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
pub fn stream_key(master: u64, label: u64, index: u64, step: u64) -> u64 {
    let mut k = splitmix(master ^ splitmix(label));
    k = splitmix(k ^ index);
    splitmix(k ^ step.rotate_left(32))
}

#[inline]
pub fn stream(master: u64, label: u64, index: u64, step: u64) -> StreamRng {
    StreamRng::seed_from_u64(stream_key(master, label, index, step))
}

/// One standard normal draw from the stream `(master, label, index, step)`.
#[inline]
pub fn normal(master: u64, label: u64, index: u64, step: u64) -> f64 {
    StandardNormal.sample(&mut stream(master, label, index, step))
}
