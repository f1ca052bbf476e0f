//! Seeded random substreams.
//!
//! A run carries one 64-bit seed. Every consumer of randomness draws from its
//! own ChaCha stream keyed by `(purpose, index)`, so adding a new consumer
//! never shifts the numbers seen by an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Split = 1,
    Noise = 2,
    Synthetic = 3,
}

pub fn substream(seed: u64, stream: Stream, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 32) | index as u64);
    rng
}
