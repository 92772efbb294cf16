//! Seeded random streams.
//!
//! A run is driven by one master seed. Each consumer (network init, episode
//! starts, exploration, dropout, replay sampling) draws from its own ChaCha8
//! stream, so adding draws in one place never shifts the numbers seen by
//! another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init,
    EnvStart,
    Exploration,
    Dropout,
    Replay,
    Synthetic,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Init => 1,
            Stream::EnvStart => 2,
            Stream::Exploration => 3,
            Stream::Dropout => 4,
            Stream::Replay => 5,
            Stream::Synthetic => 6,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
