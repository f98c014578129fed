//! Verification and random generation of MDS matrices over `{-m, ..., m}`.
//!
//! A `k x n` matrix is MDS when every `k x k` minor is nonsingular. Minors are
//! visited in lexicographic order of their column sets. Each minor first goes
//! through the prime-field filter: a nonzero residue proves nonsingularity,
//! and a minor that vanishes modulo every filter prime is decided by an exact
//! fraction-free determinant.

use rayon::prelude::*;
use rug::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_linalg::{det, det_i64, modp, IntMatrix};
use crate::sampling::{sample_matrix, EntryDistribution, Seed};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MdsVerdict {
    pub is_mds: bool,
    /// Lexicographically first column set whose minor is singular.
    pub witness: Option<Vec<usize>>,
    /// Minors examined, including the witness when there is one.
    pub minors_checked: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationReport {
    pub matrix: IntMatrix,
    pub attempts: u64,
    pub m_used: u64,
    pub seed: Seed,
}

/// Advances `cols` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(cols: &mut [usize], n: usize) -> bool {
    let k = cols.len();
    let Some(i) = (0..k).rev().find(|&i| cols[i] < n - k + i) else {
        return false;
    };
    cols[i] += 1;
    for j in i + 1..k {
        cols[j] = cols[j - 1] + 1;
    }
    true
}

/// Number of column sets examined together before the early-exit check.
const MINOR_BATCH: usize = 2048;

enum Entries {
    Small(Vec<i64>),
    Big(IntMatrix),
}

impl Entries {
    fn minor_is_singular(&self, k: usize, n: usize, cols: &[usize], buf: &mut Vec<i64>) -> bool {
        match self {
            Entries::Small(e) => {
                buf.clear();
                for i in 0..k {
                    buf.extend(cols.iter().map(|&c| e[i * n + c]));
                }
                !modp::nonsingular_mod_primes(k, buf) && det_i64(k, buf) == 0
            }
            Entries::Big(m) => {
                let minor = m.select_columns(cols).expect("columns in range");
                det(&minor).expect("square minor") == 0
            }
        }
    }
}

/// Checks all `C(n, k)` minors of a `k x n` matrix, stopping at the first
/// singular one. Batches of minors are checked in parallel and the lowest
/// failing set in lexicographic order is always the one reported.
pub fn is_mds(m: &IntMatrix) -> Result<MdsVerdict> {
    let (k, n) = (m.rows(), m.cols());
    if k > n {
        return Err(Error::Dimension(format!(
            "MDS check needs k <= n, got a {k}x{n} matrix"
        )));
    }
    let entries = match m.to_i64() {
        Some(e) => Entries::Small(e),
        None => Entries::Big(m.clone()),
    };
    let mut cols: Vec<usize> = (0..k).collect();
    let mut checked = 0u64;
    let mut more = true;
    let mut batch = Vec::with_capacity(MINOR_BATCH);
    while more {
        batch.clear();
        while more && batch.len() < MINOR_BATCH {
            batch.push(cols.clone());
            more = next_combination(&mut cols, n);
        }
        let failure = batch
            .par_iter()
            .map_init(Vec::new, |buf, c| entries.minor_is_singular(k, n, c, buf))
            .position_first(|singular| singular);
        if let Some(pos) = failure {
            return Ok(MdsVerdict {
                is_mds: false,
                witness: Some(batch[pos].clone()),
                minors_checked: checked + pos as u64 + 1,
            });
        }
        checked += batch.len() as u64;
    }
    Ok(MdsVerdict {
        is_mds: true,
        witness: None,
        minors_checked: checked,
    })
}

/// Rejection-samples `k x n` matrices with entries uniform on `{-m, ..., m}`
/// until one is MDS. Attempt `i` (from 0) uses `seed` on stream
/// `seed.stream + i`, so attempts are reproducible one by one.
pub fn generate_mds(k: usize, n: usize, m: u64, max_attempts: u64, seed: Seed) -> Result<GenerationReport> {
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if m == 0 {
        return Err(Error::Domain("alphabet bound m must be positive".into()));
    }
    if max_attempts == 0 {
        return Err(Error::Domain("max_attempts must be at least 1".into()));
    }
    let dist = EntryDistribution::uniform_symmetric(m);
    let mut last_witness = Vec::new();
    for attempt in 0..max_attempts {
        let candidate = sample_matrix(k, n, &dist, attempt_seed(seed, attempt))?;
        let verdict = is_mds(&candidate)?;
        if verdict.is_mds {
            return Ok(GenerationReport {
                matrix: candidate,
                attempts: attempt + 1,
                m_used: m,
                seed,
            });
        }
        last_witness = verdict.witness.unwrap_or_default();
    }
    Err(Error::Generation {
        attempts: max_attempts,
        last_witness,
    })
}

/// Seed used by generation attempt `attempt` (counting from 0).
pub fn attempt_seed(seed: Seed, attempt: u64) -> Seed {
    seed.with_stream(seed.stream.wrapping_add(attempt))
}

/// Conservative decay exponent used to pick a default alphabet.
pub const DEFAULT_C_HAT: f64 = 0.1;
/// Consecutive failures at one alphabet size before it is doubled.
pub const DOUBLING_PATIENCE: u64 = 8;

/// Smallest `m` with `(e n / (k m^c))^k <= 1/2` for `c = DEFAULT_C_HAT`.
pub fn default_alphabet(k: usize, n: usize) -> Result<u64> {
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    // Failure is decreasing in m: bracket by doubling, then bisect.
    let fails = |m: u64| union_bound_failure(k, n, m, DEFAULT_C_HAT).map(|f| f > 0.5);
    let mut hi = 1u64;
    while fails(hi)? {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::Domain("default alphabet overflows u64".into()))?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fails(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Generation without a caller-chosen alphabet: starts at
/// [`default_alphabet`] and doubles `m` after every [`DOUBLING_PATIENCE`]
/// consecutive failures. Attempts are numbered globally for seeding.
pub fn generate_mds_auto(k: usize, n: usize, max_attempts: u64, seed: Seed) -> Result<GenerationReport> {
    if max_attempts == 0 {
        return Err(Error::Domain("max_attempts must be at least 1".into()));
    }
    let mut m = default_alphabet(k, n)?;
    let mut last_witness = Vec::new();
    for attempt in 0..max_attempts {
        if attempt > 0 && attempt % DOUBLING_PATIENCE == 0 {
            m = m.saturating_mul(2);
        }
        let dist = EntryDistribution::uniform_symmetric(m);
        let candidate = sample_matrix(k, n, &dist, attempt_seed(seed, attempt))?;
        let verdict = is_mds(&candidate)?;
        if verdict.is_mds {
            return Ok(GenerationReport {
                matrix: candidate,
                attempts: attempt + 1,
                m_used: m,
                seed,
            });
        }
        last_witness = verdict.witness.unwrap_or_default();
    }
    Err(Error::Generation {
        attempts: max_attempts,
        last_witness,
    })
}

/// Smallest alphabet size `s` with `s^2 * k >= n`, i.e. `ceil(sqrt(n / k))`.
/// Any smaller alphabet forces `k` columns with equal top two entries.
pub fn pigeonhole_min_alphabet(k: usize, n: usize) -> Result<u64> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "the pigeonhole bound uses the first two rows, so k must be >= 2 (got {k})"
        )));
    }
    let (k, n) = (k as u64, n as u64);
    let mut s = ((n as f64 / k as f64).sqrt().ceil() as u64).saturating_sub(1);
    while s * s * k < n {
        s += 1;
    }
    Ok(s)
}

/// `(e n / (k m^c))^k` clamped to `[0, 1]`: the union bound on a random
/// `k x n` matrix failing to be MDS when each minor is singular with
/// probability at most `m^(-c k)`.
pub fn union_bound_failure(k: usize, n: usize, m: u64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Domain(format!("exponent c must lie in (0, 1], got {c}")));
    }
    if k == 0 || m == 0 {
        return Err(Error::Domain("k and m must be positive".into()));
    }
    let base = std::f64::consts::E * n as f64 / (k as f64 * (m as f64).powf(c));
    Ok(base.powi(k as i32).clamp(0.0, 1.0))
}

/// Column indices sharing the most common top-two-row prefix, as a witness
/// that pigeonhole alone rules out the MDS property when the group has at
/// least `k` members.
pub fn largest_prefix_class(m: &IntMatrix) -> Vec<usize> {
    use std::collections::BTreeMap;
    if m.rows() < 2 {
        return Vec::new();
    }
    let mut classes: BTreeMap<(Integer, Integer), Vec<usize>> = BTreeMap::new();
    for j in 0..m.cols() {
        classes
            .entry((m.get(0, j).clone(), m.get(1, j).clone()))
            .or_default()
            .push(j);
    }
    classes
        .into_values()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
        .unwrap_or_default()
}
