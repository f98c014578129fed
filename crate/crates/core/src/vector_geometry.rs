//! Diagnostics on real unit vectors: normal vectors of integer rows,
//! compressibility, the LCD functional and its grid scan, the spread of
//! incompressible vectors over small coordinates, and spectral norms.
//!
//! Vectors are held as MPFR floats (128-bit mantissa by default) because
//! fractional parts of `D x` amplify any rounding in `x`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_linalg::{kernel_basis, IntMatrix, RationalVector};
use crate::mc;
use crate::sampling::{sample_matrix, EntryDistribution, Seed};

pub const DEFAULT_PRECISION: u32 = 128;
pub const MIN_PRECISION: u32 = 64;
/// Allowed deviation of `|x|_2` from 1 for inputs that must be unit vectors.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RealVector {
    entries: Vec<Float>,
    precision: u32,
}

impl RealVector {
    pub fn new(entries: Vec<Float>, precision: u32) -> Result<Self> {
        if precision < MIN_PRECISION {
            return Err(Error::Domain(format!(
                "precision must be at least {MIN_PRECISION} bits, got {precision}"
            )));
        }
        if entries.is_empty() {
            return Err(Error::Dimension("empty vector".into()));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain("vector entries must be finite".into()));
        }
        let entries = entries.into_iter().map(|e| Float::with_val(precision, e)).collect();
        Ok(RealVector { entries, precision })
    }

    pub fn from_f64(values: &[f64], precision: u32) -> Result<Self> {
        Self::new(
            values.iter().map(|&v| Float::with_val(precision, v)).collect(),
            precision,
        )
    }

    pub fn from_rational(v: &RationalVector, precision: u32) -> Result<Self> {
        Self::new(
            v.entries().iter().map(|e| Float::with_val(precision, e)).collect(),
            precision,
        )
    }

    /// `(1, ..., 1) / sqrt(n)`.
    pub fn uniform(n: usize, precision: u32) -> Result<Self> {
        let ones = RealVector::new(vec![Float::with_val(precision, 1); n], precision)?;
        normalize(&ones)
    }

    /// The `i`-th standard basis vector of length `n`.
    pub fn basis(n: usize, i: usize, precision: u32) -> Result<Self> {
        if i >= n {
            return Err(Error::Dimension(format!("basis index {i} out of range for n = {n}")));
        }
        let mut e = vec![Float::new(precision); n];
        e[i] = Float::with_val(precision, 1);
        Self::new(e, precision)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn entries(&self) -> &[Float] {
        &self.entries
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Float::to_f64).collect()
    }

    pub fn norm(&self) -> Float {
        let squares: Vec<Float> = self.entries.iter().map(|e| e.clone().square()).collect();
        Float::with_val(self.precision, Float::sum(squares.iter())).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1u32).abs() <= UNIT_TOLERANCE
    }

    fn require_unit(&self) -> Result<()> {
        if self.is_unit() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "expected a unit vector, norm is {}",
                self.norm().to_f64()
            )))
        }
    }

    /// Inner product with an integer row.
    pub fn dot_integers(&self, row: &[rug::Integer]) -> Float {
        let terms: Vec<Float> = self
            .entries
            .iter()
            .zip(row)
            .map(|(x, a)| Float::with_val(self.precision, x * a))
            .collect();
        Float::with_val(self.precision, Float::sum(terms.iter()))
    }
}

/// Vector file format: a line with `n`, then `n` decimal reals.
impl fmt::Display for RealVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.entries.len())?;
        for e in &self.entries {
            writeln!(f, "{}", e.to_string_radix(10, None))?;
        }
        Ok(())
    }
}

impl RealVector {
    pub fn parse_with_precision(s: &str, precision: u32) -> Result<Self> {
        let mut toks = s.split_whitespace();
        let n: usize = toks
            .next()
            .ok_or_else(|| Error::Parse("empty vector file".into()))?
            .parse()
            .map_err(|_| Error::Parse("first line must be the vector length".into()))?;
        let entries = toks
            .map(|t| {
                Float::parse(t)
                    .map(|p| Float::with_val(precision, p))
                    .map_err(|_| Error::Parse(format!("bad real {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.len() != n {
            return Err(Error::Parse(format!(
                "vector file declares {n} entries but has {}",
                entries.len()
            )));
        }
        Self::new(entries, precision)
    }
}

impl FromStr for RealVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_precision(s, DEFAULT_PRECISION)
    }
}

/// Compressibility / LCD parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LcdParams {
    pub alpha: f64,
    pub beta: f64,
}

impl LcdParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(LcdParams { alpha, beta })
    }

    /// `alpha = 1/50`, `beta = 1/sqrt(m)` (requires `m >= 2`).
    pub fn defaults(m: u64) -> Result<Self> {
        Self::new(1.0 / 50.0, 1.0 / (m as f64).sqrt())
    }

    /// Sparse budget `floor(alpha n)`.
    pub fn sparse_count(&self, n: usize) -> usize {
        sparse_budget(self.alpha, n)
    }
}

/// `floor(alpha n)`, forgiving the last-bit error of decimal inputs such
/// as `0.1 * 30`.
fn sparse_budget(alpha: f64, n: usize) -> usize {
    let an = alpha * n as f64;
    let near = an.round();
    if (an - near).abs() <= 1e-9 * an.max(1.0) {
        near as usize
    } else {
        an.floor() as usize
    }
}

/// `v / |v|_2` at `v`'s precision.
pub fn normalize(v: &RealVector) -> Result<RealVector> {
    let norm = v.norm();
    if norm.is_zero() {
        return Err(Error::Domain("cannot normalize the zero vector".into()));
    }
    let entries = v
        .entries
        .iter()
        .map(|e| Float::with_val(v.precision, e / &norm))
        .collect();
    RealVector::new(entries, v.precision)
}

/// Normalizes an exact rational vector at the given precision.
pub fn normalize_rational(v: &RationalVector, precision: u32) -> Result<RealVector> {
    if v.is_zero() {
        return Err(Error::Domain("cannot normalize the zero vector".into()));
    }
    normalize(&RealVector::from_rational(v, precision)?)
}

/// Deterministic unit vector orthogonal to the rows of `rows`.
///
/// Takes the canonical kernel basis vector with the lowest free column
/// (unique when the rows are independent) and normalizes it. Scaling the rows
/// by `1/m` does not change the kernel, so unscaled rows are used directly.
pub fn normal_vector(rows: &IntMatrix, precision: u32) -> Result<RealVector> {
    let basis = kernel_basis(rows);
    let first = basis.first().ok_or_else(|| {
        Error::Dimension(format!(
            "{}x{} rows have full column rank; no normal vector exists",
            rows.rows(),
            rows.cols()
        ))
    })?;
    normalize_rational(first, precision)
}

/// Normal vector of `n - 1` random rows with entries uniform on `{-m..m}`.
pub fn random_normal_vector(n: usize, m: u64, seed: Seed, precision: u32) -> Result<RealVector> {
    if n < 2 {
        return Err(Error::Dimension("normal vectors need n >= 2".into()));
    }
    let rows = sample_matrix(n - 1, n, &EntryDistribution::uniform_symmetric(m), seed)?;
    normal_vector(&rows, precision)
}

/// Direction drawn uniformly from the unit sphere (normalized Gaussian).
pub fn random_unit_vector(n: usize, seed: Seed, precision: u32) -> Result<RealVector> {
    let mut rng = seed.rng();
    let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    normalize(&RealVector::from_f64(&g, precision)?)
}

/// Indices of the `s` largest-magnitude entries (ties broken by lower index)
/// and the 2-norm of everything else.
pub fn sparse_decomposition(values: &[Float], s: usize) -> (Vec<usize>, Float) {
    let precision = values.first().map_or(DEFAULT_PRECISION, Float::prec);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .as_abs()
            .partial_cmp(&*values[a].as_abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let s = s.min(values.len());
    let mut support = order[..s].to_vec();
    support.sort_unstable();
    let rest: Vec<Float> = order[s..].iter().map(|&i| values[i].clone().square()).collect();
    let sq = Float::with_val(precision, Float::sum(rest.iter()));
    (support, sq.sqrt())
}

/// Smallest `|v|_2` over decompositions `x = u + v` with `u` `s`-sparse:
/// the norm of `x` with its `s` largest-magnitude entries removed.
pub fn sparse_residual(x: &RealVector, s: usize) -> Float {
    sparse_decomposition(&x.entries, s).1
}

/// Whether `x` lies within `beta` of some `floor(alpha n)`-sparse vector.
/// The comparison is non-strict.
pub fn is_compressible(x: &RealVector, p: LcdParams) -> Result<bool> {
    x.require_unit()?;
    Ok(sparse_residual(x, p.sparse_count(x.len())) <= p.beta)
}

/// `y - floor(y + 1/2)`, in `[-1/2, 1/2)`; half-integers map to `-1/2`.
pub fn fractional_part(y: &Float) -> Float {
    let shifted = Float::with_val(y.prec(), y + 0.5f64);
    Float::with_val(y.prec(), y - shifted.floor())
}

/// Sparse support and residual of `{D x}`.
pub fn lcd_decomposition(x: &RealVector, d: &Float, s: usize) -> (Vec<usize>, Float) {
    let frac: Vec<Float> = x
        .entries
        .iter()
        .map(|e| fractional_part(&Float::with_val(x.precision, e * d)))
        .collect();
    sparse_decomposition(&frac, s)
}

/// `beta * min(D, sqrt n)`.
fn lcd_threshold(x: &RealVector, d: &Float, beta: f64) -> Float {
    let sqrt_n = Float::with_val(x.precision, x.len()).sqrt();
    let cap = if *d < sqrt_n { d.clone() } else { sqrt_n };
    Float::with_val(x.precision, cap * beta)
}

/// Whether `{D x}` is within `beta * min(D, sqrt n)` of a
/// `floor(alpha n)`-sparse vector.
pub fn lcd_witness(x: &RealVector, d: &Float, p: LcdParams) -> bool {
    let (_, residual) = lcd_decomposition(x, d, p.sparse_count(x.len()));
    residual <= lcd_threshold(x, d, p.beta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LcdCertificate {
    /// `D = grid_index * grid_step`.
    pub grid_index: u64,
    pub d: f64,
    pub sparse_support: Vec<usize>,
    pub residual: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LcdScanResult {
    /// First passing grid point, or `None` when no grid point up to `d_max`
    /// passes (the LCD exceeds `d_max` at this resolution).
    pub certificate: Option<LcdCertificate>,
    pub grid_step: f64,
    pub d_max: f64,
    /// Grid points that were checked and failed, all below `lcd_upper`.
    pub points_rejected: u64,
}

impl LcdScanResult {
    pub fn lcd_upper(&self) -> Option<f64> {
        self.certificate.as_ref().map(|c| c.d)
    }

    pub fn is_above_range(&self) -> bool {
        self.certificate.is_none()
    }

    /// Re-checks the certificate against [`lcd_witness`].
    pub fn verify(&self, x: &RealVector, p: LcdParams) -> bool {
        match &self.certificate {
            None => true,
            Some(c) => lcd_witness(x, &grid_point(x.precision, self.grid_step, c.grid_index), p),
        }
    }
}

fn grid_point(precision: u32, step: f64, index: u64) -> Float {
    Float::with_val(precision, step) * index
}

/// Number of grid points `j * step <= d_max`, treating ratios within 1e-9 of
/// an integer as that integer so that `d_max = k * step` is included.
fn grid_len(d_max: f64, step: f64) -> u64 {
    let r = d_max / step;
    let near = r.round();
    if (r - near).abs() <= 1e-9 * r.max(1.0) {
        near as u64
    } else {
        r.floor() as u64
    }
}

/// Scans `D = step, 2 step, ..., <= d_max` for the first `D` passing
/// [`lcd_witness`]. The result is an upper bound on the LCD accurate to the
/// grid resolution; every earlier grid point is known to fail.
pub fn lcd_scan(x: &RealVector, p: LcdParams, d_max: f64, grid_step: f64) -> Result<LcdScanResult> {
    if !(grid_step > 0.0 && grid_step <= d_max && d_max.is_finite()) {
        return Err(Error::Domain(format!(
            "need 0 < grid_step <= d_max, got step {grid_step} and d_max {d_max}"
        )));
    }
    x.require_unit()?;
    let s = p.sparse_count(x.len());
    let count = grid_len(d_max, grid_step);
    let hit = (1..=count).into_par_iter().find_map_first(|j| {
        let d = grid_point(x.precision, grid_step, j);
        let (support, residual) = lcd_decomposition(x, &d, s);
        let threshold = lcd_threshold(x, &d, p.beta);
        (residual <= threshold).then(|| LcdCertificate {
            grid_index: j,
            d: d.to_f64(),
            sparse_support: support,
            residual: residual.to_f64(),
            threshold: threshold.to_f64(),
        })
    });
    let points_rejected = hit.as_ref().map_or(count, |c| c.grid_index - 1);
    Ok(LcdScanResult {
        certificate: hit,
        grid_step,
        d_max,
        points_rejected,
    })
}

/// Whether `|x_J|_2^2 >= |x_J|_inf^2 + gamma^2` for
/// `J = {i : |x_i| <= 1/sqrt(alpha n - 1)}`.
pub fn spread_check(x: &RealVector, alpha: f64, gamma: f64) -> Result<bool> {
    let an = alpha * x.len() as f64;
    if an <= 1.0 {
        return Err(Error::Domain(format!("need alpha * n > 1, got {an}")));
    }
    let cutoff = Float::with_val(x.precision, an - 1.0).sqrt().recip();
    let small: Vec<&Float> = x.entries.iter().filter(|e| *e.as_abs() <= cutoff).collect();
    let sq: Vec<Float> = small.iter().map(|e| (*e).clone().square()).collect();
    let total = Float::with_val(x.precision, Float::sum(sq.iter()));
    let max_sq = sq.iter().max_by(|a, b| a.partial_cmp(b).unwrap()).cloned();
    let max_sq = max_sq.unwrap_or_else(|| Float::new(x.precision));
    Ok(total - max_sq >= gamma * gamma)
}

/// `|R / m|`, the largest singular value, by power iteration on
/// `(R/m)^T (R/m)`.
///
/// Iterates until the eigenvalue estimate changes by less than `1e-10`
/// relative, or 10^4 iterations. The returned `|A v|` for a unit `v` never
/// exceeds the true norm.
pub fn spectral_norm(r: &IntMatrix, scale_m: u64) -> Result<f64> {
    if scale_m == 0 {
        return Err(Error::Domain("scale m must be positive".into()));
    }
    let (rows, cols) = (r.rows(), r.cols());
    let a: Vec<f64> = r.entries().iter().map(|e| e.to_f64() / scale_m as f64).collect();
    let mut rng = Seed::new(0x5eed_5eed).rng();
    let mut v: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    let unit = |v: &mut Vec<f64>| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
        n
    };
    unit(&mut v);
    let mut av = vec![0.0; rows];
    let apply = |v: &[f64], av: &mut [f64]| {
        for (i, out) in av.iter_mut().enumerate() {
            *out = a[i * cols..(i + 1) * cols].iter().zip(v).map(|(x, y)| x * y).sum();
        }
    };
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        apply(&v, &mut av);
        let mut w: Vec<f64> = (0..cols)
            .map(|j| (0..rows).map(|i| a[i * cols + j] * av[i]).sum())
            .collect();
        let next = unit(&mut w);
        if next == 0.0 {
            return Ok(0.0);
        }
        let converged = (next - lambda).abs() < 1e-10 * next;
        lambda = next;
        v = w;
        if converged {
            break;
        }
    }
    apply(&v, &mut av);
    Ok(av.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Empirical `Pr[|R/m| >= lambda sqrt(n)]` for `n x k` matrices with entries
/// uniform on `{-m..m}`, one frequency per requested `lambda`.
pub fn spectral_tail_probe(
    n: usize,
    k: usize,
    m: u64,
    lambdas: &[f64],
    samples: u64,
    seed: Seed,
) -> Result<Vec<(f64, f64)>> {
    if n == 0 || k == 0 || m == 0 || samples == 0 {
        return Err(Error::Domain("n, k, m and samples must be positive".into()));
    }
    let dist = EntryDistribution::uniform_symmetric(m);
    let norms = mc::collect_samples(
        samples,
        seed,
        || vec![0i64; n * k],
        |rng, buf| {
            dist.fill(rng, buf);
            let r = IntMatrix::from_i64(n, k, buf).expect("shape");
            spectral_norm(&r, m).expect("m > 0")
        },
    );
    let scale = (n as f64).sqrt();
    Ok(lambdas
        .iter()
        .map(|&l| {
            let hits = norms.iter().filter(|&&s| s >= l * scale).count();
            (l, hits as f64 / samples as f64)
        })
        .collect())
}

/// `|M x|_2` evaluated at the vector's precision.
pub fn residual_norm(rows: &IntMatrix, x: &RealVector) -> Float {
    let terms: Vec<Float> = (0..rows.rows()).map(|i| x.dot_integers(rows.row(i)).square()).collect();
    Float::with_val(x.precision, Float::sum(terms.iter())).sqrt()
}
