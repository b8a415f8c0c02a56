//! Deterministic random source shared by every seeded stage.
//!
//! All sampling goes through a ChaCha8 generator keyed by the user seed; each
//! stage gets its own stream so reordering stages never shifts another
//! stage's draws. [`GENERATOR_IDENTITY`] is written into dataset metadata so
//! a split can be reproduced against a pinned release.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Names the exact sampling stack; recorded in split metadata.
pub const GENERATOR_IDENTITY: &str = "chacha8/fnv1a-stream/partial-fisher-yates/rand-0.8";

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Generator for a named pipeline stage.
pub fn stage_rng(seed: u64, stage: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(stage.as_bytes()));
    rng
}

/// Generator for the `index`-th worker of a named stage (e.g. one forest tree).
pub fn indexed_rng(seed: u64, stage: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = fnv1a64(stage.as_bytes()) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    rng.set_stream(stream);
    rng
}

/// Uniform sample of `k` distinct indices from `0..n`, returned in ascending
/// order so callers preserve the original relative order of selected items.
pub fn sample_indices<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot sample {k} of {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

/// `n` draws with replacement from `0..n` (bootstrap sample).
pub fn bootstrap_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}
