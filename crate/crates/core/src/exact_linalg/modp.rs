//! Determinants modulo word-size primes.
//!
//! A nonzero residue proves the integer determinant is nonzero, so this is a
//! sound one-sided filter: only "zero mod every prime" needs an exact check.

/// 2^61 - 1 and 2^62 - 57.
pub(crate) const PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 4_611_686_018_427_387_847];

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn reduce(v: i64, p: u64) -> u64 {
    v.rem_euclid(p as i64) as u64
}

/// Determinant of an `n x n` matrix modulo the prime `p`.
pub(crate) fn det_mod(n: usize, entries: &[i64], p: u64) -> u64 {
    let mut a: Vec<u64> = entries.iter().map(|&v| reduce(v, p)).collect();
    let mut det = 1u64;
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| a[i * n + k] != 0) else {
            return 0;
        };
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            det = (p - det) % p;
        }
        let pivot = a[k * n + k];
        det = mul_mod(det, pivot, p);
        let inv = pow_mod(pivot, p - 2, p);
        for i in k + 1..n {
            let f = mul_mod(a[i * n + k], inv, p);
            if f == 0 {
                continue;
            }
            for j in k + 1..n {
                let sub = mul_mod(f, a[k * n + j], p);
                a[i * n + j] = (a[i * n + j] + p - sub) % p;
            }
        }
    }
    det
}

/// True when the determinant is nonzero modulo at least one filter prime,
/// which proves the matrix is nonsingular over the integers.
pub(crate) fn nonsingular_mod_primes(n: usize, entries: &[i64]) -> bool {
    PRIMES.iter().any(|&p| det_mod(n, entries, p) != 0)
}
