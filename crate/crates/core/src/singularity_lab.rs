//! Singularity probability of random integer matrices: Monte Carlo estimates,
//! exhaustive enumeration at tiny sizes, the classical bounds, and a fit of
//! the decay exponent `c` in `p(n, m) ~ m^(-c n)`.

use std::time::Instant;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_linalg::{is_singular_i64, small_path_ok};
use crate::mc::{self, Z95};
use crate::sampling::{EntryDistribution, Seed};

/// Default cap on the number of matrices [`count_singular`] may enumerate.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Monte Carlo estimate of a probability with a 95% Wilson interval.
///
/// With zero hits the upper end is the rule-of-three bound `3 / trials`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub m: u64,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: Seed,
    /// Wall time; left out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub elapsed: f64,
}

impl EstimateReport {
    pub fn from_counts(n: usize, m: u64, trials: u64, hits: u64, seed: Seed, elapsed: f64) -> Self {
        let estimate = hits as f64 / trials as f64;
        let (ci_low, ci_high) = if hits == 0 {
            (0.0, 3.0 / trials as f64)
        } else {
            mc::wilson_interval(hits, trials, Z95)
        };
        EstimateReport {
            n,
            m,
            trials,
            hits,
            estimate,
            ci_low,
            ci_high,
            seed,
            elapsed,
        }
    }

    /// Two-sided Wilson interval at normal quantile `z`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        mc::wilson_interval(self.hits, self.trials, z)
    }

    /// `hits / trials` as an exact fraction.
    pub fn exact_estimate(&self) -> Rational {
        Rational::from((self.hits, self.trials))
    }
}

/// Estimates `Pr[M singular]` for `M` an `n x n` matrix with i.i.d. entries
/// from `dist`. Every trial is decided exactly. Runs on the current rayon
/// pool; the result does not depend on its size.
pub fn mc_singularity(n: usize, dist: &EntryDistribution, trials: u64, seed: Seed) -> Result<EstimateReport> {
    if n == 0 {
        return Err(Error::Dimension("matrix size must be at least 1".into()));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let start = Instant::now();
    let small_ok = small_path_ok(n, dist.max_abs());
    let hits = mc::count_hits(
        trials,
        seed,
        || (vec![0i64; n * n], Vec::with_capacity(n * n)),
        |rng, (buf, scratch)| {
            dist.fill(rng, buf);
            is_singular_i64(n, buf, scratch, small_ok)
        },
    );
    Ok(EstimateReport::from_counts(
        n,
        dist.max_abs(),
        trials,
        hits,
        seed,
        start.elapsed().as_secs_f64(),
    ))
}

/// Exact count of singular matrices among all `(2m+1)^(n^2)` matrices with
/// entries in `{-m, ..., m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularCount {
    pub singular: u64,
    pub total: u64,
}

impl SingularCount {
    pub fn fraction(&self) -> Rational {
        Rational::from((self.singular, self.total))
    }
}

/// Matrices enumerated per parallel block.
const ENUM_BLOCK: u64 = 1 << 14;

/// Enumerates every matrix in row-major odometer order (entry `(0,0)` is the
/// most significant digit, the last entry turns fastest) and counts the
/// singular ones. Refuses when `(2m+1)^(n^2)` exceeds `budget`.
pub fn count_singular(n: usize, m: u64, budget: u64) -> Result<SingularCount> {
    if n == 0 {
        return Err(Error::Dimension("matrix size must be at least 1".into()));
    }
    let base = 2 * m + 1;
    let cells = n * n;
    let required = Integer::from(base).pow(cells as u32);
    if required > budget {
        return Err(Error::Budget {
            required: required.to_string(),
            budget,
        });
    }
    let total = required.to_u64().expect("bounded by budget");
    let small_ok = small_path_ok(n, m);
    let blocks = total.div_ceil(ENUM_BLOCK);
    let per_block: Vec<u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * ENUM_BLOCK;
            let len = ENUM_BLOCK.min(total - start);
            // Decode the block start into odometer digits.
            let mut digits = vec![0u64; cells];
            let mut rest = start;
            for d in digits.iter_mut().rev() {
                *d = rest % base;
                rest /= base;
            }
            let mut entries: Vec<i64> = digits.iter().map(|&d| d as i64 - m as i64).collect();
            let mut scratch = Vec::with_capacity(cells);
            let mut hits = 0u64;
            for step in 0..len {
                if is_singular_i64(n, &entries, &mut scratch, small_ok) {
                    hits += 1;
                }
                if step + 1 == len {
                    break;
                }
                for cell in (0..cells).rev() {
                    if entries[cell] < m as i64 {
                        entries[cell] += 1;
                        break;
                    }
                    entries[cell] = -(m as i64);
                }
            }
            hits
        })
        .collect();
    Ok(SingularCount {
        singular: per_block.iter().sum(),
        total,
    })
}

/// Exact `Pr[M singular]` by enumeration, with the default budget.
pub fn exact_singular_fraction(n: usize, m: u64) -> Result<Rational> {
    Ok(count_singular(n, m, DEFAULT_BUDGET)?.fraction())
}

/// `(2m+1)^(-n)`: the probability that the first two rows coincide.
pub fn lower_bound(n: usize, m: u64) -> Result<Rational> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "the equal-rows bound needs at least two rows, got n = {n}"
        )));
    }
    let denom = Integer::from(2 * m + 1).pow(n as u32);
    Ok(Rational::from((Integer::from(1), denom)))
}

/// `min(1, n/m)`: Schwartz-Zippel applied to the degree-`n` determinant.
pub fn schwartz_zippel_bound(n: usize, m: u64) -> Result<Rational> {
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let r = Rational::from((n as u64, m));
    Ok(if r > 1 { Rational::from(1) } else { r })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub n: usize,
    pub m: u64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Points that entered the regression (those with positive probability).
    pub points: Vec<FitPoint>,
    pub c_hat: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln p` around the fitted line.
    pub residual: f64,
}

/// Least-squares fit of `ln p = -c * n * ln m + b`.
///
/// Points with zero probability carry no information about the slope and are
/// dropped; at least three positive points are required, and every point must
/// have `m >= 2` (for `m = 1` the regressor vanishes).
pub fn fit_exponent(points: &[FitPoint]) -> Result<ExponentFit> {
    if let Some(p) = points.iter().find(|p| p.m < 2) {
        return Err(Error::Fit(format!("point (n={}, m={}) has m < 2", p.n, p.m)));
    }
    if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(&p.probability)) {
        return Err(Error::Fit(format!("probability {} outside [0, 1]", p.probability)));
    }
    let used: Vec<FitPoint> = points.iter().copied().filter(|p| p.probability > 0.0).collect();
    if used.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points with positive probability, got {}",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| -(p.n as f64) * (p.m as f64).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.probability.ln()).collect();
    let k = used.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / k;
    let mean_y = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx <= f64::EPSILON * mean_x.abs().max(1.0) {
        return Err(Error::Fit("all points share the same n ln m".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let c_hat = sxy / sxx;
    let intercept = mean_y - c_hat * mean_x;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (c_hat * x + intercept)).powi(2))
        .sum();
    Ok(ExponentFit {
        points: used,
        c_hat,
        intercept,
        residual: (sse / k).sqrt(),
    })
}
