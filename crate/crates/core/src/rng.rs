//! Counter-based seed derivation for reproducible Monte-Carlo runs.
//!
//! Every random draw in an experiment belongs to a `(domain, index, sub)`
//! coordinate, e.g. (bits, symbol 17, 0) or (noise, symbol 17, Eb/N0 point 3).
//! Its generator is a ChaCha8 stream seeded with
//!
//! ```text
//! seed = mix(mix(mix(master ^ mix(domain)) ^ index) ^ sub)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. Draws therefore depend only on
//! their coordinate, never on scheduling or on how many workers run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod domain {
    pub const BITS: u64 = 0x6269_7473;
    pub const NOISE: u64 = 0x6e6f_6973;
    pub const TIMING: u64 = 0x7469_6d65;
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, domain: u64, index: u64, sub: u64) -> u64 {
    mix(mix(mix(master ^ mix(domain)) ^ index) ^ sub)
}

pub fn substream(master: u64, domain: u64, index: u64, sub: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, index, sub))
}

pub fn random_bits<R: Rng>(rng: &mut R, n: usize) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random::<bool>())).collect()
}
