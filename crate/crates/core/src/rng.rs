//! Deterministic random streams.
//!
//! Every replication owns an independent ChaCha stream selected by
//! `(master_seed, index)`, so results do not depend on how replications are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// Stream `index` of the generator keyed by `master_seed`.
pub fn stream(master_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Stream for a named sub-experiment, kept disjoint from replication streams.
pub fn tagged_stream(master_seed: u64, tag: u32, index: u32) -> StreamRng {
    stream(master_seed, (1u64 << 63) | (u64::from(tag) << 32) | u64::from(index))
}

/// Runs `f` for replications `0..reps`, each on its own stream, in parallel.
/// Results come back in replication order.
pub fn replicate<T, F>(master_seed: u64, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut StreamRng) -> T + Sync,
{
    (0..reps as u64)
        .into_par_iter()
        .map(|i| f(i, &mut stream(master_seed, i)))
        .collect()
}
