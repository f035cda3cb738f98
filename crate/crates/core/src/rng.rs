//! Reproducible random streams.
//!
//! Every stochastic routine draws from a ChaCha8 stream addressed by a
//! `(seed, index)` pair. The index selects an independent ChaCha stream, so
//! replicate `r` of a Monte Carlo sweep is reproducible on its own and
//! replicates can run in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Address of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    pub seed: u64,
    pub index: u64,
}

impl Stream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// The stream of replicate `index` under the same seed.
    pub fn replicate(self, index: u64) -> Self {
        Self { index, ..self }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

impl From<u64> for Stream {
    fn from(seed: u64) -> Self {
        Self::new(seed, 0)
    }
}
