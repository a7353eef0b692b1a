//! Seeded random sub-streams.
//!
//! Every consumer of randomness derives its generator from the single user
//! seed plus a stream tag, so that changing one consumer never shifts the
//! draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named random sub-streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Jitter = 1,
    Generator = 2,
    TransformSubsample = 3,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
