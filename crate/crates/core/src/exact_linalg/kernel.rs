use rug::{Integer, Rational};

use super::matrix::IntMatrix;

/// Exact vector of reduced rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalVector {
    entries: Vec<Rational>,
}

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        // rug keeps every Rational canonical (reduced, positive denominator).
        RationalVector { entries }
    }

    pub fn from_integers<I: Into<Integer>>(entries: impl IntoIterator<Item = I>) -> Self {
        Self::new(entries.into_iter().map(|e| Rational::from(e.into())).collect())
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| *e == 0)
    }

    /// Scales by the lcm of denominators and divides by the gcd of
    /// numerators, then flips the sign so the first nonzero entry is positive.
    pub fn canonical(&self) -> RationalVector {
        let lcm = self.entries.iter().fold(Integer::from(1), |acc, e| acc.lcm(e.denom()));
        let mut ints: Vec<Integer> = self
            .entries
            .iter()
            .map(|e| e.numer() * Integer::from(&lcm / e.denom()))
            .collect();
        let content = ints.iter().fold(Integer::new(), |acc, e| acc.gcd(e));
        if content != 0 {
            for e in &mut ints {
                e.div_exact_mut(&content);
            }
        }
        if ints.iter().find(|e| **e != 0).is_some_and(|e| *e < 0) {
            for e in &mut ints {
                *e = -std::mem::take(e);
            }
        }
        RationalVector::from_integers(ints)
    }
}

/// Rank over the rationals by fraction-free row echelon elimination.
pub fn rank(m: &IntMatrix) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.entries().to_vec();
    let mut prev = Integer::from(1);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.swap(r * cols + j, p * cols + j);
            }
        }
        for i in r + 1..rows {
            for j in c + 1..cols {
                let mut t = Integer::from(&a[i * cols + j] * &a[r * cols + c]);
                t -= Integer::from(&a[i * cols + c] * &a[r * cols + j]);
                t.div_exact_mut(&prev);
                a[i * cols + j] = t;
            }
            a[i * cols + c] = Integer::new();
        }
        prev = a[r * cols + c].clone();
        r += 1;
    }
    r
}

/// Reduced row echelon form over the rationals with the first nonzero entry
/// of each column (scanning down from the current row) as pivot. Returns the
/// reduced rows and the pivot column of each.
fn rref(m: &IntMatrix) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Rational>> = (0..rows)
        .map(|i| m.row(i).iter().map(|e| Rational::from(e.clone())).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        let inv = Rational::from(a[r][c].recip_ref());
        for v in &mut a[r][c..] {
            *v *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *x -= Rational::from(&f * y);
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Basis of the right kernel `{v : M v = 0}` over the rationals.
///
/// One vector per free column, in increasing free-column order; each vector
/// is integer-cleared, content-reduced and has a positive first nonzero
/// coordinate. Empty iff `M` has full column rank.
pub fn kernel_basis(m: &IntMatrix) -> Vec<RationalVector> {
    let cols = m.cols();
    let (reduced, pivots) = rref(m);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|free| {
            let mut v = vec![Rational::new(); cols];
            v[free] = Rational::from(1);
            for (row, &p) in reduced.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            RationalVector::new(v).canonical()
        })
        .collect()
}
