//! Seeded random streams.
//!
//! Every stochastic stage draws from its own ChaCha stream derived from the
//! run seed, so changing how many numbers one stage consumes never shifts
//! another stage's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named substreams of a run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Sbm = 1,
    Walks = 2,
    Sgns = 3,
    Init = 4,
    Split = 5,
    Louvain = 6,
    Perturb = 7,
}

impl Stream {
    pub fn name(self) -> &'static str {
        match self {
            Stream::Sbm => "sbm",
            Stream::Walks => "walks",
            Stream::Sgns => "sgns",
            Stream::Init => "init",
            Stream::Split => "split",
            Stream::Louvain => "louvain",
            Stream::Perturb => "perturb",
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
