//! Counter-based random streams: batch `k` of a run seeded with `seed`
//! always draws from the same ChaCha stream, independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
