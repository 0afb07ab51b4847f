//! Seeded, splittable random streams.
//!
//! Every sampling routine takes an explicit seed. Bulk work is cut into
//! fixed-size chunks and chunk `c` draws from stream `c` of the seed, so the
//! output does not depend on how many worker threads run the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draws per chunk in bulk sampling.
pub const CHUNK: usize = 4096;

/// Generator name recorded in sample-file headers.
pub const GENERATOR: &str = "rim-chacha8";

/// The `stream`-th independent sub-stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a label into a seed, for deriving per-task seeds (splitmix64 finaliser).
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `count` draws in chunks, in parallel, with chunk-indexed streams.
pub(crate) fn chunked<T: Send>(count: usize, seed: u64, draw: impl Fn(&mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
    use rayon::prelude::*;
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}
