//! Sharded Monte Carlo harness and binomial confidence intervals.
//!
//! Trials are cut into fixed-size shards. Shard `s` always draws from
//! `seed.shard_rng(s)` and per-shard hit counts are summed in shard order,
//! so results are bit-identical for any number of worker threads.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::sampling::{Seed, MAX_SHARDS};

/// Standard normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Standard normal quantile for a two-sided 99.9% interval.
pub const Z999: f64 = 3.290_526_731_491_926;

/// Trials per shard.
pub const SHARD_TRIALS: u64 = 4096;

/// Wilson score interval for `hits` successes out of `trials`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0 && hits <= trials);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if hits == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let high = if hits == trials {
        1.0
    } else {
        (centre + half).clamp(p, 1.0)
    };
    (low, high)
}

/// Counts successes over `trials` independent trials.
///
/// `init` builds per-shard scratch state; `trial` runs one trial and returns
/// whether it hit. Runs on the current rayon pool.
pub fn count_hits<S, I, T>(trials: u64, seed: Seed, init: I, trial: T) -> u64
where
    I: Fn() -> S + Sync,
    T: Fn(&mut ChaCha8Rng, &mut S) -> bool + Sync,
{
    let shards = trials.div_ceil(SHARD_TRIALS);
    assert!(shards <= MAX_SHARDS, "too many trials for one seed stream");
    let per_shard: Vec<u64> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = seed.shard_rng(shard);
            let mut state = init();
            let start = shard * SHARD_TRIALS;
            let len = SHARD_TRIALS.min(trials - start);
            (0..len).filter(|_| trial(&mut rng, &mut state)).count() as u64
        })
        .collect();
    per_shard.iter().sum()
}

/// Runs `trials` independent trials and returns their outcomes in trial
/// order, using the same sharding as [`count_hits`].
pub fn collect_samples<S, O, I, T>(trials: u64, seed: Seed, init: I, trial: T) -> Vec<O>
where
    O: Send,
    I: Fn() -> S + Sync,
    T: Fn(&mut ChaCha8Rng, &mut S) -> O + Sync,
{
    let shards = trials.div_ceil(SHARD_TRIALS);
    assert!(shards <= MAX_SHARDS, "too many trials for one seed stream");
    let per_shard: Vec<Vec<O>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = seed.shard_rng(shard);
            let mut state = init();
            let start = shard * SHARD_TRIALS;
            let len = SHARD_TRIALS.min(trials - start);
            (0..len).map(|_| trial(&mut rng, &mut state)).collect()
        })
        .collect();
    per_shard.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn wilson_contains_estimate() {
        for (h, n) in [(0, 10), (1, 10), (5, 10), (10, 10), (3, 100_000)] {
            let (lo, hi) = wilson_interval(h, n, Z95);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{h}/{n}: [{lo}, {hi}]");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn wilson_reference_value() {
        // 8 of 20 at 95%: centre 0.41567..., half-width 0.19653...
        let (lo, hi) = wilson_interval(8, 20, Z95);
        assert!((lo - 0.2188).abs() < 1e-4, "{lo}");
        assert!((hi - 0.6134).abs() < 1e-4, "{hi}");
    }

    #[test]
    fn count_is_thread_independent() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| count_hits(50_000, Seed::new(7), || (), |rng, _| rng.next_u32() % 3 == 0))
        };
        assert_eq!(run(1), run(4));
    }
}
