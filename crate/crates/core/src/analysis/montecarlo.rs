use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Draws per block. Fixed so that the trial-to-stream mapping never depends
/// on how many workers run.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// Generator for block `index` of a run seeded with `seed`.
pub fn block_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `block` over `trials` draws split into fixed-size blocks, in
/// parallel, and returns the per-block results in block order.
pub fn map_blocks<T, F>(trials: u64, seed: u64, block: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let blocks = trials.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .map(|i| {
            let n = BLOCK_SIZE.min(trials - i * BLOCK_SIZE);
            block(&mut block_rng(seed, i), n)
        })
        .collect()
}

/// 95% normal-approximation half-width of a proportion.
pub fn proportion_halfwidth(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}
