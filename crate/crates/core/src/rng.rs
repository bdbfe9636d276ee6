//! Deterministic seed derivation.
//!
//! Every random stream in a run is derived from a single base seed, so one
//! number reproduces initialization, dropout masks, shuffling and donor
//! selection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Prng = ChaCha8Rng;

/// Independent random streams carved out of a run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init,
    Dropout,
    Shuffle,
    Donor,
    Scramble,
    Split,
    Jitter,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Init => 0x11,
            Stream::Dropout => 0x22,
            Stream::Shuffle => 0x33,
            Stream::Donor => 0x44,
            Stream::Scramble => 0x55,
            Stream::Split => 0x66,
            Stream::Jitter => 0x77,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, stream: Stream) -> u64 {
    mix64(mix64(base) ^ stream.tag())
}

pub fn stream_rng(base: u64, stream: Stream) -> Prng {
    Prng::seed_from_u64(derive_seed(base, stream))
}

pub fn seeded(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_stable() {
        let a = derive_seed(7, Stream::Init);
        let b = derive_seed(7, Stream::Dropout);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(7, Stream::Init));
        assert_ne!(derive_seed(7, Stream::Init), derive_seed(8, Stream::Init));
    }
}
