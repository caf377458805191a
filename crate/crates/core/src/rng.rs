//! Seeded, splittable random streams.
//!
//! Every random object is drawn from a ChaCha20 stream identified by a
//! `(seed, stream)` pair. ChaCha is counter based, so instance `i` of an
//! ensemble depends only on `(seed, i)` and never on the order in which
//! instances are generated or on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Generator for stream `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derived stream used for auxiliary randomness (eigensolver start vectors,
/// measurement sampling) so it never collides with instance generation.
pub fn aux_rng(seed: u64, stream: u64, purpose: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}
