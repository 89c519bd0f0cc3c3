use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The crate's seeded generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` index pairs `(i, j)` over `0..m` with `i ≠ j`.
///
/// Both indices are drawn uniformly with replacement; a draw with `i == j`
/// is rejected and redrawn.
pub fn sample_pairs(m: usize, n: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if m < 2 {
        return Err(Error::Argument(format!("need at least 2 rows to sample pairs, got {m}")));
    }
    let mut rng = rng(seed);
    let mut pairs = Vec::with_capacity(n);
    while pairs.len() < n {
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        if i != j {
            pairs.push((i, j));
        }
    }
    Ok(pairs)
}
