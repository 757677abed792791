//! Seeded random streams.
//!
//! Every stochastic component draws from a [`ChaCha12Rng`] substream addressed
//! by `(seed, index)`. Substreams with different indices never overlap, so
//! per-path generators can be handed to worker threads in any order without
//! changing what any single path sees.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Deterministic generator for substream `index` of the run seeded by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
