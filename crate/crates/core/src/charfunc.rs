//! Characteristic function of `Y = <X/m, x>` for `X` uniform on
//! `{-m..m}^n`, its Esseen-type integral, and Monte Carlo small-ball probes.
//!
//! Each coordinate contributes the Dirichlet-kernel factor
//! `F(y) = |sin((2m+1) pi y) / ((2m+1) sin(pi y))|` evaluated at
//! `y = x_k t / (2 pi m)`, and `|phi_Y(t)|` is the product of these factors.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc;
use crate::sampling::{EntryDistribution, Seed};
use crate::singularity_lab::EstimateReport;
use crate::vector_geometry::{LcdParams, RealVector};

/// Below this `|sin(pi y)|` the factor is replaced by its limit 1.
const NEAR_INTEGER: f64 = 1.0 / (1u64 << 40) as f64;

/// Gaussian-regime constant: `F(y, m) <= 1 - C2 (m y)^2` on
/// `y in (0, min(1/m, 1/2)]` for every `m <= 64`. Produced by
/// [`derive_c2`]`(64, 10_000)`.
pub const C2: f64 = 0.8;

/// Decay constant of [`decay_g`], the largest value (3 significant digits)
/// with `F(y, m) <= G(m y)` on `[0, 1/2]` for every `m <= 64`. Produced by
/// [`derive_eta`]`(64, 10_000, C2)`.
pub const ETA: f64 = 0.8;

/// `F(y) = |sin((2m+1) pi y) / ((2m+1) sin(pi y))|`, with value 1 at integers.
pub fn dirichlet_f(y: f64, m: u64) -> f64 {
    // F has period 1; reducing first keeps the sines accurate for large |y|.
    let r = y - (y + 0.5).floor();
    let s = (PI * r).sin();
    if s.abs() < NEAR_INTEGER {
        return 1.0;
    }
    let k = (2 * m + 1) as f64;
    ((k * PI * r).sin() / (k * s)).abs().min(1.0)
}

/// `G(y) = exp(-eta y^2)` on `[0, 1]` and `exp(-eta) / y` beyond.
pub fn decay_g(y: f64, eta: f64) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::Domain(format!("G is defined for y >= 0, got {y}")));
    }
    Ok(if y <= 1.0 {
        (-eta * y * y).exp()
    } else {
        (-eta).exp() / y
    })
}

/// `sqrt(log2 m) / m`, the smallest scale at which the discrete projection
/// behaves like a continuous one.
pub fn epsilon_0(m: u64) -> f64 {
    (m as f64).log2().sqrt() / m as f64
}

/// `|phi_Y(t)|` for a fixed direction, with the coordinates held as `f64`.
#[derive(Clone, Debug)]
pub struct CharFn {
    coords: Vec<f64>,
    m: u64,
}

impl CharFn {
    pub fn new(x: &RealVector, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("m must be positive".into()));
        }
        Ok(CharFn { coords: x.to_f64(), m })
    }

    pub fn modulus(&self, t: f64) -> f64 {
        let scale = t / (2.0 * PI * self.m as f64);
        self.coords.iter().map(|&xk| dirichlet_f(xk * scale, self.m)).product()
    }

    /// Points in `(0, t_max)` where some factor vanishes; the integrand has a
    /// kink at each. `None` when there are more than `cap`.
    fn zeros_below(&self, t_max: f64, cap: usize) -> Option<Vec<f64>> {
        let k = (2 * self.m + 1) as f64;
        let two_pi_m = 2.0 * PI * self.m as f64;
        let mut pts = Vec::new();
        for &xk in &self.coords {
            let a = xk.abs();
            if a == 0.0 {
                continue;
            }
            // Factor zero at y = j / (2m+1) with j not a multiple of 2m+1.
            let jmax = (t_max * k * a / two_pi_m).floor() as u64;
            if pts.len() as u64 + jmax > cap as u64 {
                return None;
            }
            for j in 1..=jmax {
                if j % (2 * self.m + 1) != 0 {
                    let t = two_pi_m * j as f64 / (k * a);
                    if t < t_max {
                        pts.push(t);
                    }
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        Some(pts)
    }
}

/// `|phi_Y(t)| = prod_k F(x_k t / (2 pi m))`.
pub fn charfn_modulus(x: &RealVector, t: f64, m: u64) -> Result<f64> {
    Ok(CharFn::new(x, m)?.modulus(t))
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    (mid, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    mid: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, mid, fm);
    let (rm, frm, right) = simpson(f, mid, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, mid, fm, lm, flm, left, tol / 2.0, depth - 1)
        + adaptive(f, mid, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson on each panel between consecutive breakpoints.
fn integrate_panels<F: Fn(f64) -> f64 + Sync>(f: &F, edges: &[f64], rel_tol: f64) -> f64 {
    let span = edges[edges.len() - 1] - edges[0];
    // Rough total fixes the absolute tolerance shared out by panel width.
    let rough: f64 = edges
        .par_windows(2)
        .map(|w| {
            let (fa, fb) = (f(w[0]), f(w[1]));
            simpson(f, w[0], fa, w[1], fb).2
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let abs_tol = rel_tol * rough.abs().max(f64::MIN_POSITIVE) / 4.0;
    let parts: Vec<f64> = edges
        .par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (f(a), f(b));
            let (mid, fm, whole) = simpson(f, a, fa, b, fb);
            adaptive(f, a, fa, b, fb, mid, fm, whole, abs_tol * (b - a) / span, 48)
        })
        .collect();
    parts.iter().sum()
}

/// Breakpoints beyond which panels fall back to a uniform partition.
const MAX_BREAKPOINTS: usize = 1 << 18;

/// `eps * integral_{-1/eps}^{1/eps} |phi_Y(t)| dt` to relative accuracy
/// `1e-6`. The integrand is even, so the half-line integral is doubled.
/// Panels are split at the zeros of the individual factors.
pub fn esseen_integral(x: &RealVector, m: u64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let cf = CharFn::new(x, m)?;
    let t_max = 1.0 / epsilon;
    let mut edges = vec![0.0];
    match cf.zeros_below(t_max, MAX_BREAKPOINTS) {
        Some(z) => edges.extend(z),
        None => {
            let panels = MAX_BREAKPOINTS as f64;
            edges.extend((1..MAX_BREAKPOINTS).map(|i| t_max * i as f64 / panels));
        }
    }
    edges.push(t_max);
    let half = integrate_panels(&|t| cf.modulus(t), &edges, 1e-6);
    Ok(2.0 * epsilon * half)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallBallReport {
    pub epsilon: f64,
    pub mc: EstimateReport,
    pub esseen_integral: f64,
    /// `eps / gamma + (alpha beta m)^(-alpha n)` with `gamma = sqrt(beta)`,
    /// present when compressibility parameters were supplied.
    pub lcd_bound: Option<f64>,
}

/// Monte Carlo estimate of `Pr[|<X/m, x>| <= eps]` with `X` uniform on
/// `{-m..m}^n`, alongside the Esseen integral and, given `lcd`, the
/// LCD-conditioned bound value (without its unspecified constant).
pub fn small_ball_probe(
    x: &RealVector,
    m: u64,
    epsilon: f64,
    trials: u64,
    seed: Seed,
    lcd: Option<LcdParams>,
) -> Result<SmallBallReport> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let esseen = esseen_integral(x, m, epsilon)?;
    let start = Instant::now();
    let coords = x.to_f64();
    let n = coords.len();
    let dist = EntryDistribution::uniform_symmetric(m);
    let radius = epsilon * m as f64;
    let hits = mc::count_hits(
        trials,
        seed,
        || (),
        |rng, _| {
            let y: f64 = coords.iter().map(|&c| dist.sample(rng) as f64 * c).sum();
            y.abs() <= radius
        },
    );
    let mc = EstimateReport::from_counts(n, m, trials, hits, seed, start.elapsed().as_secs_f64());
    let lcd_bound = lcd.map(|p| {
        let gamma = p.beta.sqrt();
        epsilon / gamma + (p.alpha * p.beta * m as f64).powf(-p.alpha * n as f64)
    });
    Ok(SmallBallReport {
        epsilon,
        mc,
        esseen_integral: esseen,
        lcd_bound,
    })
}

/// Rounds down to three significant digits.
fn floor_3sig(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(2 - v.log10().floor() as i32);
    (v * scale).floor() / scale
}

/// `min (1 - F(y, m)) / (m y)^2` over `y in (0, min(1/m, 1/2)]`,
/// `m = 1..=max_m`, on `grid` equally spaced points per `m`, rounded down to
/// three significant digits.
pub fn derive_c2(max_m: u64, grid: usize) -> f64 {
    let raw = (1..=max_m)
        .into_par_iter()
        .map(|m| {
            let top = (1.0 / m as f64).min(0.5);
            (1..=grid)
                .map(|j| {
                    let y = top * j as f64 / grid as f64;
                    let my = m as f64 * y;
                    (1.0 - dirichlet_f(y, m)) / (my * my)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    floor_3sig(raw)
}

/// Largest `eta <= min(ln pi, c2)` with `F(y, m) <= G(m y)` on the grid of
/// `[0, 1/2]` for `m = 1..=max_m`, rounded down to three significant digits.
pub fn derive_eta(max_m: u64, grid: usize, c2: f64) -> f64 {
    let cap = PI.ln().min(c2);
    let raw = (1..=max_m)
        .into_par_iter()
        .map(|m| {
            (1..=grid)
                .filter_map(|j| {
                    let y = 0.5 * j as f64 / grid as f64;
                    let f = dirichlet_f(y, m);
                    if f <= 0.0 {
                        return None;
                    }
                    let my = m as f64 * y;
                    Some(if my <= 1.0 { -f.ln() / (my * my) } else { -(f * my).ln() })
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    floor_3sig(raw.min(cap))
}
