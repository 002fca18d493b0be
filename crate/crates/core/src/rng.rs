//! Reproducible random number streams.
//!
//! All disorder in the crate is drawn from ChaCha8, a counter-based stream
//! generator: a 64-bit seed selects the key and a stream index selects an
//! independent substream. Worker `i` always uses stream `i`, so results are
//! identical at any parallelism degree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for (seed, stream).
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-row seed derivation for sweeps keyed by an integer label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
