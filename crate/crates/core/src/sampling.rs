//! Seeded, reproducible sampling of integer entries, vectors and matrices.
//!
//! All randomness comes from ChaCha8 keyed by [`Seed::value`] on the ChaCha
//! stream [`Seed::stream`]. Parallel work is split into shards and shard `s`
//! reads the keystream starting at word `s << 40`, so shards never overlap
//! and a shard's draws do not depend on which thread runs it.

use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::IntMatrix;

/// Keystream words reserved per shard.
const SHARD_WORDS_LOG2: u32 = 40;
/// Shards addressable within one ChaCha stream (2^68 words).
pub const MAX_SHARDS: u64 = 1 << (68 - SHARD_WORDS_LOG2);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed { value, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Seed { stream, ..self }
    }

    /// Generator for single-threaded use; identical to shard 0.
    pub fn rng(&self) -> ChaCha8Rng {
        self.shard_rng(0)
    }

    /// Generator for worker shard `shard`.
    pub fn shard_rng(&self, shard: u64) -> ChaCha8Rng {
        assert!(shard < MAX_SHARDS, "shard index {shard} out of range");
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream);
        rng.set_word_pos((shard as u128) << SHARD_WORDS_LOG2);
        rng
    }
}

/// Uniform draw from `0..size` by rejection from the enclosing power-of-two
/// range, so there is no modulo bias.
fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, size: u64) -> u64 {
    debug_assert!(size >= 1);
    if size == 1 {
        return 0;
    }
    let mask = size.next_power_of_two().wrapping_sub(1);
    let mask = if mask == 0 { u64::MAX } else { mask };
    if mask <= u32::MAX as u64 {
        loop {
            let v = rng.next_u32() as u64 & mask;
            if v < size {
                return v;
            }
        }
    }
    loop {
        let v = rng.next_u64() & mask;
        if v < size {
            return v;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistKind {
    /// Uniform on `{-m, ..., m}`.
    UniformSymmetric { m: u64 },
    /// Finite law given by an exact pmf.
    Custom { support: Vec<i64>, pmf: Vec<Rational> },
}

/// A finite integer-valued probability law.
///
/// Custom laws sample through a cumulative table: atom `i` wins when a
/// uniform 64-bit word falls below `floor(cdf_i * 2^64)`, the last atom
/// taking the remainder. Each atom's probability is off by at most `2^-64`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryDistribution {
    kind: DistKind,
    thresholds: Vec<u64>,
}

#[derive(Deserialize)]
struct CustomSpec {
    support: Vec<i64>,
    pmf: Vec<serde_json::Value>,
}

fn parse_probability(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Ok(r) = Rational::from_str(s) {
        return Ok(r);
    }
    // Plain decimals such as "0.25" are converted exactly.
    let bad = || Error::Parse(format!("bad probability {s:?}; expected \"p/q\" or a decimal"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (whole, frac) = body.split_once('.').ok_or_else(bad)?;
    if !(whole.chars().chain(frac.chars())).all(|c| c.is_ascii_digit()) || whole.len() + frac.len() == 0 {
        return Err(bad());
    }
    let digits = Integer::from_str(&format!("{whole}{frac}")).map_err(|_| bad())?;
    let scale = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
    let r = Rational::from((digits, scale));
    Ok(if neg { -r } else { r })
}

impl EntryDistribution {
    pub fn uniform_symmetric(m: u64) -> Self {
        EntryDistribution {
            kind: DistKind::UniformSymmetric { m },
            thresholds: Vec::new(),
        }
    }

    pub fn custom(support: Vec<i64>, pmf: Vec<Rational>) -> Result<Self> {
        if support.is_empty() || support.len() != pmf.len() {
            return Err(Error::Domain(format!(
                "custom distribution needs equal, nonempty support and pmf (got {} and {})",
                support.len(),
                pmf.len()
            )));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("support values must be distinct".into()));
        }
        if pmf.iter().any(|p| *p < 0) {
            return Err(Error::Domain("probabilities must be non-negative".into()));
        }
        let total: Rational = pmf.iter().sum();
        if total != 1 {
            return Err(Error::Domain(format!("pmf sums to {total}, not 1")));
        }
        let grid = Integer::from(1) << 64;
        let mut cdf = Rational::new();
        let mut thresholds = Vec::with_capacity(pmf.len());
        for p in &pmf[..pmf.len() - 1] {
            cdf += p;
            let t = Rational::from(&cdf * &grid).floor().numer().clone();
            thresholds.push(t.to_u64().unwrap_or(u64::MAX));
        }
        Ok(EntryDistribution {
            kind: DistKind::Custom { support, pmf },
            thresholds,
        })
    }

    /// Reads `{"support": [..], "pmf": ["p/q", ..]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: CustomSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("distribution file: {e}")))?;
        let pmf = spec
            .pmf
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => parse_probability(s),
                serde_json::Value::Number(n) => parse_probability(&n.to_string()),
                other => Err(Error::Parse(format!("bad probability {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::custom(spec.support, pmf)
    }

    /// Law of the sum of `m` independent copies of the `{-1, 0, 1}` variable
    /// with masses `(mu/2, 1 - mu, mu/2)`, computed by exact convolution.
    pub fn vempala_sum(mu: &Rational, m: u64) -> Result<Self> {
        if *mu <= 0 || *mu >= 1 {
            return Err(Error::Domain(format!("mu must lie in (0, 1), got {mu}")));
        }
        if m == 0 {
            return Err(Error::Domain("number of summands must be at least 1".into()));
        }
        let side = Rational::from(mu / 2u32);
        let centre = 1u32 - mu.clone();
        // pmf[j] is the mass at j - k after k steps.
        let mut pmf = vec![Rational::from(1)];
        for _ in 0..m {
            let mut next = vec![Rational::new(); pmf.len() + 2];
            for (j, p) in pmf.iter().enumerate() {
                next[j] += Rational::from(p * &side);
                next[j + 1] += Rational::from(p * &centre);
                next[j + 2] += Rational::from(p * &side);
            }
            pmf = next;
        }
        let m = m as i64;
        Self::custom((-m..=m).collect(), pmf)
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn support(&self) -> Vec<i64> {
        match &self.kind {
            DistKind::UniformSymmetric { m } => (-(*m as i64)..=*m as i64).collect(),
            DistKind::Custom { support, .. } => support.clone(),
        }
    }

    pub fn pmf(&self) -> Vec<Rational> {
        match &self.kind {
            DistKind::UniformSymmetric { m } => {
                let size = 2 * m + 1;
                vec![Rational::from((1, size)); size as usize]
            }
            DistKind::Custom { pmf, .. } => pmf.clone(),
        }
    }

    /// `max_x Pr[x]`.
    pub fn max_probability(&self) -> Rational {
        match &self.kind {
            DistKind::UniformSymmetric { m } => Rational::from((1, 2 * m + 1)),
            DistKind::Custom { pmf, .. } => pmf.iter().max().cloned().unwrap_or_default(),
        }
    }

    /// Largest absolute value in the support.
    pub fn max_abs(&self) -> u64 {
        match &self.kind {
            DistKind::UniformSymmetric { m } => *m,
            DistKind::Custom { support, .. } => support.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0),
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        match &self.kind {
            DistKind::UniformSymmetric { m } => uniform_below(rng, 2 * m + 1) as i64 - *m as i64,
            DistKind::Custom { support, .. } => {
                let u = rng.next_u64();
                let idx = self.thresholds.partition_point(|&t| t <= u);
                support[idx]
            }
        }
    }

    pub fn fill<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [i64]) {
        for v in out {
            *v = self.sample(rng);
        }
    }
}

/// `n x k` matrix with i.i.d. entries from `dist`.
pub fn sample_matrix(n: usize, k: usize, dist: &EntryDistribution, seed: Seed) -> Result<IntMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::Dimension(format!("cannot sample a {n}x{k} matrix")));
    }
    let mut rng = seed.rng();
    let mut buf = vec![0i64; n * k];
    dist.fill(&mut rng, &mut buf);
    IntMatrix::from_i64(n, k, &buf)
}

/// Column vector (`n x 1`) with i.i.d. entries from `dist`.
pub fn sample_vector(n: usize, dist: &EntryDistribution, seed: Seed) -> Result<IntMatrix> {
    sample_matrix(n, 1, dist, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let d = EntryDistribution::uniform_symmetric(3);
        let a = sample_matrix(5, 7, &d, Seed::new(42)).unwrap();
        let b = sample_matrix(5, 7, &d, Seed::new(42)).unwrap();
        assert_eq!(a, b);
        let c = sample_matrix(5, 7, &d, Seed::new(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_alphabet_gives_zeros() {
        let d = EntryDistribution::uniform_symmetric(0);
        let a = sample_matrix(4, 4, &d, Seed::new(1)).unwrap();
        assert!(a.entries().iter().all(|e| *e == 0));
        assert_eq!(d.max_probability(), 1);
    }

    #[test]
    fn vector_entries_within_support() {
        let d = EntryDistribution::uniform_symmetric(5);
        let v = sample_vector(1000, &d, Seed::new(9)).unwrap();
        assert_eq!((v.rows(), v.cols()), (1000, 1));
        assert!(v.entries().iter().all(|e| *e >= -5 && *e <= 5));
        assert!(sample_vector(0, &d, Seed::new(9)).is_err());
    }

    #[test]
    fn max_probability_of_uniform() {
        for m in 1..20u64 {
            let d = EntryDistribution::uniform_symmetric(m);
            assert_eq!(d.max_probability(), Rational::from((1, 2 * m + 1)));
            assert_eq!(d.pmf().iter().sum::<Rational>(), 1);
        }
    }

    #[test]
    fn vempala_small_cases() {
        let half = Rational::from((1, 2));
        let d1 = EntryDistribution::vempala_sum(&half, 1).unwrap();
        assert_eq!(d1.support(), vec![-1, 0, 1]);
        assert_eq!(
            d1.pmf(),
            vec![Rational::from((1, 4)), Rational::from((1, 2)), Rational::from((1, 4))]
        );
        for m in 1..=8 {
            let mu = Rational::from((1, 3));
            let d = EntryDistribution::vempala_sum(&mu, m).unwrap();
            assert_eq!(d.pmf().iter().sum::<Rational>(), 1);
            assert_eq!(d.support().len() as u64, 2 * m + 1);
        }
        assert!(EntryDistribution::vempala_sum(&Rational::from(0), 2).is_err());
        assert!(EntryDistribution::vempala_sum(&Rational::from(1), 2).is_err());
        assert!(EntryDistribution::vempala_sum(&half, 0).is_err());
    }

    #[test]
    fn custom_validation() {
        let q = |a, b| Rational::from((a, b));
        assert!(EntryDistribution::custom(vec![0, 1], vec![q(1, 2), q(1, 3)]).is_err());
        assert!(EntryDistribution::custom(vec![0, 0], vec![q(1, 2), q(1, 2)]).is_err());
        assert!(EntryDistribution::custom(vec![0], vec![]).is_err());
        assert!(EntryDistribution::custom(vec![0, 1], vec![q(3, 2), q(-1, 2)]).is_err());
        let d = EntryDistribution::custom(vec![7, -2], vec![q(1, 4), q(3, 4)]).unwrap();
        assert_eq!(d.max_probability(), q(3, 4));
        assert_eq!(d.max_abs(), 7);
    }

    #[test]
    fn custom_json_file() {
        let d = EntryDistribution::from_json_str(r#"{"support": [-1, 0, 1], "pmf": ["1/4", "0.5", "1/4"]}"#).unwrap();
        assert_eq!(d.pmf()[1], Rational::from((1, 2)));
        assert!(EntryDistribution::from_json_str(r#"{"support": [0], "pmf": ["x"]}"#).is_err());
        assert!(EntryDistribution::from_json_str("not json").is_err());
    }

    #[test]
    fn custom_sampling_frequencies() {
        let q = |a, b| Rational::from((a, b));
        let d = EntryDistribution::custom(vec![-3, 0, 5], vec![q(1, 8), q(5, 8), q(1, 4)]).unwrap();
        let mut rng = Seed::new(5).rng();
        let n = 80_000;
        let mut counts = [0u32; 3];
        for _ in 0..n {
            match d.sample(&mut rng) {
                -3 => counts[0] += 1,
                0 => counts[1] += 1,
                5 => counts[2] += 1,
                other => panic!("value {other} outside support"),
            }
        }
        for (c, p) in counts.iter().zip([0.125, 0.625, 0.25]) {
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn zero_mass_atoms_never_drawn() {
        let q = |a, b| Rational::from((a, b));
        let d = EntryDistribution::custom(vec![1, 2, 3], vec![q(1, 2), q(0, 1), q(1, 2)]).unwrap();
        let mut rng = Seed::new(11).rng();
        assert!((0..10_000).all(|_| d.sample(&mut rng) != 2));
    }

    #[test]
    fn shards_are_disjoint_and_stable() {
        let s = Seed::new(3);
        let a: Vec<u64> = {
            let mut r = s.shard_rng(5);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = s.shard_rng(5);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        let mut r0 = s.shard_rng(4);
        assert!((0..8).map(|_| r0.next_u64()).all(|v| !a.contains(&v)));
    }

    #[test]
    fn probability_parsing() {
        assert_eq!(parse_probability("3/4").unwrap(), Rational::from((3, 4)));
        assert_eq!(parse_probability("0.125").unwrap(), Rational::from((1, 8)));
        assert_eq!(parse_probability("1").unwrap(), 1);
        assert!(parse_probability(".").is_err());
        assert!(parse_probability("1/0").is_err());
    }
}
