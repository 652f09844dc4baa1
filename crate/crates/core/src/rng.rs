//! Project-wide pseudo-random number generation.
//!
//! Everything that draws randomness (dataset generation, parameter
//! initialization, shuffling, dropout masks, SPSA perturbations) goes through
//! ChaCha with 8 rounds, a fixed published algorithm whose output is
//! identical across platforms and releases. Substreams let independent
//! consumers (e.g. one per spectrum) draw from the same seed without
//! coordinating: stream `i` of seed `s` is statistically independent of
//! stream `j != i`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The one generator used throughout the crate.
pub type Prng = ChaCha8Rng;

/// Root generator for a 64-bit seed (stream 0).
pub fn seeded(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// Independent substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> Prng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}
