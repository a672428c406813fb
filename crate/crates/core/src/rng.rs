//! Seeded random streams.
//!
//! All randomness in the crate comes from ChaCha8 keyed by a 64-bit seed.
//! Independent consumers (restarts, generated families, test cases) take
//! distinct stream ids of the same seed, so results do not depend on the
//! order in which the streams are drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream `stream` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
