//! Independent oracles shared by the integration tests. None of these call
//! into the crate's own linear algebra.

#![allow(dead_code)]

use rug::{Integer, Rational};

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(rows: &[Vec<Integer>]) -> Integer {
    let n = rows.len();
    match n {
        0 => Integer::from(1),
        1 => rows[0][0].clone(),
        _ => {
            let mut total = Integer::new();
            for j in 0..n {
                if rows[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<Integer>> = rows[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = &rows[0][j] * cofactor_det(&minor);
                if j % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total
        }
    }
}

pub fn cofactor_det_i64(n: usize, entries: &[i64]) -> Integer {
    let rows: Vec<Vec<Integer>> = entries
        .chunks(n)
        .map(|r| r.iter().map(|&v| Integer::from(v)).collect())
        .collect();
    cofactor_det(&rows)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Rank as the size of the largest nonzero square minor.
pub fn minor_rank(rows: &[Vec<Integer>]) -> usize {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    for size in (1..=r.min(c)).rev() {
        for rs in subsets(r, size) {
            for cs in subsets(c, size) {
                let minor: Vec<Vec<Integer>> = rs
                    .iter()
                    .map(|&i| cs.iter().map(|&j| rows[i][j].clone()).collect())
                    .collect();
                if cofactor_det(&minor) != 0 {
                    return size;
                }
            }
        }
    }
    0
}

/// Column sets (lexicographic order) of a `k x n` matrix whose minor is singular.
pub fn singular_minors(rows: &[Vec<Integer>]) -> Vec<Vec<usize>> {
    let k = rows.len();
    let n = rows[0].len();
    subsets(n, k)
        .into_iter()
        .filter(|cs| {
            let minor: Vec<Vec<Integer>> = rows
                .iter()
                .map(|r| cs.iter().map(|&j| r[j].clone()).collect())
                .collect();
            cofactor_det(&minor) == 0
        })
        .collect()
}

/// Number of singular `n x n` matrices over `{-m..m}`, by listing them all.
pub fn brute_singular_count(n: usize, m: i64) -> (u64, u64) {
    let cells = n * n;
    let base = (2 * m + 1) as u64;
    let total = base.pow(cells as u32);
    let mut singular = 0;
    let mut entries = vec![0i64; cells];
    for code in 0..total {
        let mut c = code;
        for e in entries.iter_mut() {
            *e = (c % base) as i64 - m;
            c /= base;
        }
        if cofactor_det_i64(n, &entries) == 0 {
            singular += 1;
        }
    }
    (singular, total)
}

/// `|E exp(i t <X/m, x>)|` with `X` uniform on `{-m..m}^n`, summed over the
/// whole support without factoring.
pub fn charfn_by_summation(x: &[f64], t: f64, m: i64) -> f64 {
    let n = x.len();
    let base = (2 * m + 1) as usize;
    let total = base.pow(n as u32);
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for code in 0..total {
        let mut c = code;
        let mut y = 0.0;
        for &xk in x {
            let v = (c % base) as i64 - m;
            c /= base;
            y += v as f64 * xk;
        }
        let phase = t * y / m as f64;
        re += phase.cos();
        im += phase.sin();
    }
    (re * re + im * im).sqrt() / total as f64
}

/// `M v` over the rationals.
pub fn mat_vec(rows: &[Vec<Integer>], v: &[Rational]) -> Vec<Rational> {
    rows.iter()
        .map(|r| {
            r.iter()
                .zip(v)
                .fold(Rational::new(), |acc, (a, b)| acc + Rational::from(a) * b)
        })
        .collect()
}

pub fn to_integer_rows(entries: &[i64], cols: usize) -> Vec<Vec<Integer>> {
    entries
        .chunks(cols)
        .map(|r| r.iter().map(|&v| Integer::from(v)).collect())
        .collect()
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}
