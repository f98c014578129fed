//! Fraction-free (Bareiss) determinants.
//!
//! Every intermediate value of Bareiss elimination is a minor of the input,
//! so Hadamard's bound on the input rows bounds all of them. When twice the
//! square of that bound fits in an `i128` the elimination runs on machine
//! integers; otherwise it falls back to GMP integers. Both paths divide
//! exactly and never round.

use rug::{Assign, Integer};

use super::matrix::IntMatrix;
use super::modp;
use crate::error::{Error, Result};

/// log2 of the largest Hadamard bound the i128 path accepts. The update
/// `a*b - c*d` needs `2 * H^2 < 2^127`.
const I128_LOG2_LIMIT: f64 = 62.0;

/// Conservative log2 of Hadamard's bound `prod_i max(1, |row_i|)`.
fn hadamard_log2(n: usize, cols: usize, entries: &[i64]) -> f64 {
    (0..n)
        .map(|i| {
            let sq: f64 = entries[i * cols..(i + 1) * cols]
                .iter()
                .map(|&v| (v as f64) * (v as f64))
                .sum();
            // Slack for f64 rounding in the row norms.
            (sq.sqrt() * (1.0 + 1e-12)).max(1.0).log2()
        })
        .sum()
}

/// Whether every `n x n` matrix with entries bounded by `max_abs` can use the
/// machine-integer path. Lets hot loops decide once per experiment.
pub fn small_path_ok(n: usize, max_abs: u64) -> bool {
    let row = (max_abs as f64) * (n as f64).sqrt() * (1.0 + 1e-12);
    row.max(1.0).log2() * n as f64 <= I128_LOG2_LIMIT
}

fn bareiss_i128(n: usize, a: &mut [i128]) -> i128 {
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k * n + k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                return 0;
            };
            for j in k..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let lead = a[i * n + k];
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * pivot - lead * a[k * n + j]) / prev;
            }
        }
        prev = pivot;
    }
    sign * a[n * n - 1]
}

fn bareiss_big(n: usize, mut a: Vec<Integer>) -> Integer {
    let mut negate = false;
    let mut prev = Integer::from(1);
    let mut t = Integer::new();
    for k in 0..n {
        if a[k * n + k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                return Integer::new();
            };
            for j in k..n {
                a.swap(k * n + j, p * n + j);
            }
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                t.assign(&a[i * n + j] * &a[k * n + k]);
                t -= Integer::from(&a[i * n + k] * &a[k * n + j]);
                t.div_exact_mut(&prev);
                std::mem::swap(&mut a[i * n + j], &mut t);
            }
        }
        prev = a[k * n + k].clone();
    }
    let mut det = a.pop().unwrap_or_default();
    if negate {
        det = -det;
    }
    det
}

/// Determinant of a square `n x n` row-major slice of machine integers.
pub fn det_i64(n: usize, entries: &[i64]) -> Integer {
    debug_assert_eq!(entries.len(), n * n);
    if hadamard_log2(n, n, entries) <= I128_LOG2_LIMIT {
        let mut a: Vec<i128> = entries.iter().map(|&v| v as i128).collect();
        Integer::from(bareiss_i128(n, &mut a))
    } else {
        bareiss_big(n, entries.iter().map(|&v| Integer::from(v)).collect())
    }
}

/// Singularity of an `n x n` machine-integer matrix.
///
/// `small_ok` must only be true when [`small_path_ok`] holds for the entry
/// bound of `entries`; callers in hot loops check that once.
pub fn is_singular_i64(n: usize, entries: &[i64], scratch: &mut Vec<i128>, small_ok: bool) -> bool {
    if small_ok {
        scratch.clear();
        scratch.extend(entries.iter().map(|&v| v as i128));
        bareiss_i128(n, scratch) == 0
    } else {
        !modp::nonsingular_mod_primes(n, entries) && det_i64(n, entries) == 0
    }
}

/// Exact determinant by fraction-free elimination.
pub fn det(m: &IntMatrix) -> Result<Integer> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    Ok(match m.to_i64() {
        Some(small) => det_i64(n, &small),
        None => bareiss_big(n, m.entries().to_vec()),
    })
}

/// `det(M) == 0`. Uses the prime-field pre-filter when the matrix is too large
/// for the machine-integer path; a zero residue is always confirmed exactly.
pub fn is_singular(m: &IntMatrix) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "singularity test needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    match m.to_i64() {
        Some(small) if hadamard_log2(n, n, &small) <= I128_LOG2_LIMIT => {
            let mut a: Vec<i128> = small.iter().map(|&v| v as i128).collect();
            Ok(bareiss_i128(n, &mut a) == 0)
        }
        Some(small) => Ok(!modp::nonsingular_mod_primes(n, &small) && det_i64(n, &small) == 0),
        None => Ok(bareiss_big(n, m.entries().to_vec()) == 0),
    }
}
