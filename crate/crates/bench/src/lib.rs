//! Fixtures shared by the benchmarks in `benches/`.

use permix::random::stream_rng;
use permix::Permutation;
use rand::seq::SliceRandom;

/// A uniformly random permutation of size `n` from stream `stream` of `seed`.
pub fn random_perm(n: usize, seed: u64, stream: u64) -> Permutation {
    let mut ranks: Vec<usize> = (0..n).collect();
    ranks.shuffle(&mut stream_rng(seed, stream));
    Permutation::from_ranks(ranks).expect("shuffled ranks form a permutation")
}
