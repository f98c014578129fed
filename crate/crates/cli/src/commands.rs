use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Subcommand};
use intmat::charfunc::{decay_g, dirichlet_f, epsilon_0, small_ball_probe, C2, ETA};
use intmat::mds_forge::{generate_mds, generate_mds_auto, is_mds, largest_prefix_class};
use intmat::singularity_lab::{
    count_singular, fit_exponent, lower_bound, mc_singularity, schwartz_zippel_bound, EstimateReport, FitPoint,
    DEFAULT_BUDGET,
};
use intmat::vector_geometry::{
    is_compressible, lcd_scan, normal_vector as kernel_direction, random_normal_vector, random_unit_vector,
    sparse_residual, DEFAULT_PRECISION, MIN_PRECISION,
};
use intmat::{EntryDistribution, Error, IntMatrix, LcdParams, RealVector, Result, Seed};
use serde_json::{json, Map, Value};

use crate::output::{csv_error, ratio_text, Report, Table};
use crate::SeedArgs;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<IntMatrix> {
    read(path)?.parse()
}

fn read_vector(path: &Path, precision: u32) -> Result<RealVector> {
    RealVector::parse_with_precision(&read(path)?, precision)
}

fn check_precision(precision: u32) -> Result<u32> {
    if precision < MIN_PRECISION {
        return Err(Error::Domain(format!(
            "precision must be at least {MIN_PRECISION} bits"
        )));
    }
    Ok(precision)
}

fn config(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn seed_json(seed: Seed) -> Value {
    json!({ "value": seed.value, "stream": seed.stream })
}

fn path_json(p: &Option<PathBuf>) -> Value {
    p.as_ref()
        .map_or(Value::Null, |p| Value::String(p.display().to_string()))
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Matrix size; a comma-separated list runs every (n, m) pair.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Entries uniform on {-m..m}; a comma-separated list is allowed.
    #[arg(
        long,
        value_delimiter = ',',
        conflicts_with = "dist",
        required_unless_present = "dist"
    )]
    m: Vec<u64>,
    /// Entry distribution as `custom:<file>` (JSON with support and pmf).
    #[arg(long)]
    dist: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    seed: SeedArgs,
}

fn load_distribution(spec: &str) -> Result<(EntryDistribution, Value)> {
    let path = spec
        .strip_prefix("custom:")
        .ok_or_else(|| Error::Domain(format!("--dist expects custom:<file>, got {spec:?}")))?;
    let dist = EntryDistribution::from_json_str(&read(Path::new(path))?)?;
    let pmf: Vec<String> = dist.pmf().iter().map(ratio_text).collect();
    let cfg = json!({ "support": dist.support(), "pmf": pmf });
    Ok((dist, cfg))
}

fn estimate_json(r: &EstimateReport) -> Value {
    json!({
        "n": r.n,
        "m": r.m,
        "trials": r.trials,
        "hits": r.hits,
        "estimate": r.estimate,
        "estimate_exact": ratio_text(&r.exact_estimate()),
        "ci_low": r.ci_low,
        "ci_high": r.ci_high,
        "seed": seed_json(r.seed),
    })
}

const ESTIMATE_COLUMNS: [&str; 8] = ["n", "m", "trials", "hits", "estimate", "ci_low", "ci_high", "seed"];

fn estimate_row(r: &EstimateReport) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.m.to_string(),
        r.trials.to_string(),
        r.hits.to_string(),
        r.estimate.to_string(),
        r.ci_low.to_string(),
        r.ci_high.to_string(),
        r.seed.value.to_string(),
    ]
}

pub fn estimate(a: &EstimateArgs) -> Result<Report> {
    let base = a.seed.seed();
    let mut jobs: Vec<(usize, EntryDistribution)> = Vec::new();
    let mut dist_cfg = Value::Null;
    match &a.dist {
        Some(spec) => {
            let (dist, cfg) = load_distribution(spec)?;
            dist_cfg = cfg;
            jobs.extend(a.n.iter().map(|&n| (n, dist.clone())));
        }
        None => {
            for &n in &a.n {
                for &m in &a.m {
                    jobs.push((n, EntryDistribution::uniform_symmetric(m)));
                }
            }
        }
    }
    let mut table = Table::new(&ESTIMATE_COLUMNS);
    let mut results = Vec::new();
    let mut human = String::new();
    for (i, (n, dist)) in jobs.iter().enumerate() {
        // Each (n, m) pair gets its own stream so list runs match single runs
        // made with the corresponding --stream.
        let seed = base.with_stream(base.stream.wrapping_add(i as u64));
        let r = mc_singularity(*n, dist, a.trials, seed)?;
        human.push_str(&format!(
            "n={} m={} trials={} hits={} estimate={:.6} 95% CI [{:.6}, {:.6}] seed={}:{} ({:.2}s)\n",
            r.n, r.m, r.trials, r.hits, r.estimate, r.ci_low, r.ci_high, seed.value, seed.stream, r.elapsed
        ));
        table.push(estimate_row(&r));
        results.push(estimate_json(&r));
    }
    Ok(Report {
        command: "estimate",
        config: config(vec![
            ("n", json!(a.n)),
            ("m", json!(a.m)),
            ("dist", dist_cfg),
            ("trials", json!(a.trials)),
            ("seed", seed_json(base)),
        ]),
        result: json!({ "estimates": results }),
        table,
        human,
    })
}

#[derive(Args, Debug)]
pub struct ExactArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: u64,
    /// Largest number of matrices to enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

pub fn exact(a: &ExactArgs) -> Result<Report> {
    let start = Instant::now();
    let count = count_singular(a.n, a.m, a.budget)?;
    let fraction = count.fraction();
    let lower = if a.n >= 2 { Some(lower_bound(a.n, a.m)?) } else { None };
    let upper = schwartz_zippel_bound(a.n, a.m)?;
    let human = format!(
        "Pr[singular] = {} = {:.10} ({} of {} matrices, {:.2}s)\n",
        ratio_text(&fraction),
        fraction.to_f64(),
        count.singular,
        count.total,
        start.elapsed().as_secs_f64()
    );
    let mut table = Table::new(&["n", "m", "singular", "total", "probability", "probability_exact"]);
    table.push(vec![
        a.n.to_string(),
        a.m.to_string(),
        count.singular.to_string(),
        count.total.to_string(),
        fraction.to_f64().to_string(),
        ratio_text(&fraction),
    ]);
    Ok(Report {
        command: "exact",
        config: config(vec![("n", json!(a.n)), ("m", json!(a.m)), ("budget", json!(a.budget))]),
        result: json!({
            "n": a.n,
            "m": a.m,
            "singular": count.singular,
            "total": count.total,
            "probability": fraction.to_f64(),
            "probability_exact": ratio_text(&fraction),
            "lower_bound": lower.as_ref().map(|l| l.to_f64()),
            "lower_bound_exact": lower.as_ref().map(ratio_text),
            "schwartz_zippel_bound": upper.to_f64(),
            "schwartz_zippel_bound_exact": ratio_text(&upper),
        }),
        table,
        human,
    })
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// CSV with at least the columns n, m and estimate (`#` lines ignored).
    #[arg(long)]
    input: PathBuf,
}

fn read_fit_points(path: &Path) -> Result<Vec<FitPoint>> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("{}: missing column {name:?}", path.display())))
    };
    let (ni, mi, pi) = (column("n")?, column("m")?, column("estimate")?);
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        // Concatenated outputs repeat the header; skip those lines.
        if record == header {
            continue;
        }
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let bad = |what: &str| Error::Parse(format!("{}: record {}: bad {what}", path.display(), line + 1));
        points.push(FitPoint {
            n: field(ni).parse().map_err(|_| bad("n"))?,
            m: field(mi).parse().map_err(|_| bad("m"))?,
            probability: field(pi).parse().map_err(|_| bad("estimate"))?,
        });
    }
    Ok(points)
}

pub fn fit(a: &FitArgs) -> Result<Report> {
    let points = read_fit_points(&a.input)?;
    let f = fit_exponent(&points)?;
    let mut table = Table::new(&["n", "m", "probability", "fitted"]);
    for p in &f.points {
        let fitted = (f.intercept - f.c_hat * p.n as f64 * (p.m as f64).ln()).exp();
        table.push(vec![
            p.n.to_string(),
            p.m.to_string(),
            p.probability.to_string(),
            fitted.to_string(),
        ]);
    }
    let human = format!(
        "c_hat = {:.6}, intercept = {:.6}, rms residual = {:.6} ({} of {} points used)\n",
        f.c_hat,
        f.intercept,
        f.residual,
        f.points.len(),
        points.len()
    );
    Ok(Report {
        command: "fit",
        config: config(vec![("input", json!(a.input.display().to_string()))]),
        result: serde_json::to_value(&f).map_err(|e| Error::Parse(e.to_string()))?,
        table,
        human,
    })
}

#[derive(Subcommand, Debug)]
pub enum MdsCommand {
    /// Check every k x k minor of a matrix file.
    Verify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Rejection-sample a k x n MDS matrix.
    Generate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Alphabet bound; chosen from a union-bound heuristic when absent.
        #[arg(long)]
        m: Option<u64>,
        #[arg(long, default_value_t = 64)]
        max_attempts: u64,
        #[command(flatten)]
        seed: SeedArgs,
        /// Matrix file to write.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

pub fn mds(c: &MdsCommand) -> Result<Report> {
    match c {
        MdsCommand::Verify { input } => {
            let m = read_matrix(input)?;
            let v = is_mds(&m)?;
            let class = largest_prefix_class(&m);
            let human = match &v.witness {
                None => format!("MDS: yes ({} minors checked)\n", v.minors_checked),
                Some(w) => format!(
                    "MDS: no; singular minor at columns {w:?} ({} minors checked)\n",
                    v.minors_checked
                ),
            };
            let mut table = Table::new(&["k", "n", "is_mds", "witness", "minors_checked"]);
            let witness = v
                .witness
                .as_ref()
                .map(|w| w.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            table.push(vec![
                m.rows().to_string(),
                m.cols().to_string(),
                v.is_mds.to_string(),
                witness,
                v.minors_checked.to_string(),
            ]);
            Ok(Report {
                command: "mds verify",
                config: config(vec![("input", json!(input.display().to_string()))]),
                result: json!({
                    "k": m.rows(),
                    "n": m.cols(),
                    "is_mds": v.is_mds,
                    "witness": v.witness,
                    "minors_checked": v.minors_checked,
                    "largest_prefix_class": class,
                }),
                table,
                human,
            })
        }
        MdsCommand::Generate {
            k,
            n,
            m,
            max_attempts,
            seed,
            output,
        } => {
            let s = seed.seed();
            let report = match m {
                Some(m) => generate_mds(*k, *n, *m, *max_attempts, s)?,
                None => generate_mds_auto(*k, *n, *max_attempts, s)?,
            };
            if let Some(path) = output {
                std::fs::write(path, report.matrix.to_string())?;
            }
            let mut human = format!(
                "MDS {}x{} matrix over {{-{m}..{m}}} after {} attempt(s)\n",
                k,
                n,
                report.attempts,
                m = report.m_used
            );
            if output.is_none() {
                human.push_str(&report.matrix.to_string());
            }
            let mut table = Table::new(&["k", "n", "attempts", "m_used", "seed"]);
            table.push(vec![
                k.to_string(),
                n.to_string(),
                report.attempts.to_string(),
                report.m_used.to_string(),
                s.value.to_string(),
            ]);
            Ok(Report {
                command: "mds generate",
                config: config(vec![
                    ("k", json!(k)),
                    ("n", json!(n)),
                    ("m", json!(m)),
                    ("max_attempts", json!(max_attempts)),
                    ("seed", seed_json(s)),
                    ("output", path_json(output)),
                ]),
                result: serde_json::to_value(&report).map_err(|e| Error::Parse(e.to_string()))?,
                table,
                human,
            })
        }
    }
}

#[derive(Args, Debug)]
pub struct LcdArgs {
    /// Vector file: a line with n, then n decimal reals.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    dmax: f64,
    #[arg(long)]
    step: f64,
    /// Working precision in bits.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
}

pub fn lcd(a: &LcdArgs) -> Result<Report> {
    let x = read_vector(&a.input, check_precision(a.precision)?)?;
    let p = LcdParams::new(a.alpha, a.beta)?;
    let r = lcd_scan(&x, p, a.dmax, a.step)?;
    let human = match &r.certificate {
        Some(c) => format!(
            "LCD <= {} (grid point {}; residual {:.6e} <= {:.6e} off {} sparse coordinates)\n",
            c.d,
            c.grid_index,
            c.residual,
            c.threshold,
            c.sparse_support.len()
        ),
        None => format!("LCD > {} (no grid point passed; step {})\n", a.dmax, a.step),
    };
    let mut table = Table::new(&[
        "n",
        "alpha",
        "beta",
        "d_max",
        "step",
        "lcd_upper",
        "above_range",
        "points_rejected",
    ]);
    table.push(vec![
        x.len().to_string(),
        a.alpha.to_string(),
        a.beta.to_string(),
        a.dmax.to_string(),
        a.step.to_string(),
        r.lcd_upper().map(|d| d.to_string()).unwrap_or_default(),
        r.is_above_range().to_string(),
        r.points_rejected.to_string(),
    ]);
    Ok(Report {
        command: "lcd",
        config: config(vec![
            ("input", json!(a.input.display().to_string())),
            ("alpha", json!(a.alpha)),
            ("beta", json!(a.beta)),
            ("dmax", json!(a.dmax)),
            ("step", json!(a.step)),
            ("precision", json!(a.precision)),
        ]),
        result: json!({
            "n": x.len(),
            "lcd_upper": r.lcd_upper(),
            "above_range": r.is_above_range(),
            "points_rejected": r.points_rejected,
            "certificate": r.certificate,
        }),
        table,
        human,
    })
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
}

pub fn compress(a: &CompressArgs) -> Result<Report> {
    let x = read_vector(&a.input, check_precision(a.precision)?)?;
    let p = LcdParams::new(a.alpha, a.beta)?;
    let compressible = is_compressible(&x, p)?;
    let s = p.sparse_count(x.len());
    let residual = sparse_residual(&x, s).to_f64();
    let human = format!(
        "{} (residual {residual:.6} after removing {s} coordinates, beta {})\n",
        if compressible { "compressible" } else { "incompressible" },
        a.beta
    );
    let mut table = Table::new(&["n", "alpha", "beta", "sparse_count", "residual", "compressible"]);
    table.push(vec![
        x.len().to_string(),
        a.alpha.to_string(),
        a.beta.to_string(),
        s.to_string(),
        residual.to_string(),
        compressible.to_string(),
    ]);
    Ok(Report {
        command: "compress",
        config: config(vec![
            ("input", json!(a.input.display().to_string())),
            ("alpha", json!(a.alpha)),
            ("beta", json!(a.beta)),
            ("precision", json!(a.precision)),
        ]),
        result: json!({
            "n": x.len(),
            "sparse_count": s,
            "residual": residual,
            "compressible": compressible,
        }),
        table,
        human,
    })
}

#[derive(Args, Debug)]
pub struct CharfuncArgs {
    #[arg(long)]
    m: u64,
    /// Intervals on [0, 1/2]; grid + 1 points are printed.
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    /// Decay constant of G.
    #[arg(long, default_value_t = ETA)]
    eta: f64,
}

pub fn charfunc(a: &CharfuncArgs) -> Result<Report> {
    if a.m == 0 || a.grid == 0 {
        return Err(Error::Domain("m and grid must be positive".into()));
    }
    if a.eta.is_nan() || a.eta <= 0.0 {
        return Err(Error::Domain(format!("eta must be positive, got {}", a.eta)));
    }
    let mut table = Table::new(&["y", "F", "G_bound"]);
    let mut rows = Vec::new();
    let mut human = format!("{:>12} {:>14} {:>14}\n", "y", "F(y)", "G(m y)");
    for j in 0..=a.grid {
        let y = 0.5 * j as f64 / a.grid as f64;
        let f = dirichlet_f(y, a.m);
        let g = decay_g(a.m as f64 * y, a.eta)?;
        human.push_str(&format!("{y:>12.6} {f:>14.8} {g:>14.8}\n"));
        table.push(vec![y.to_string(), f.to_string(), g.to_string()]);
        rows.push(json!({ "y": y, "F": f, "G_bound": g }));
    }
    Ok(Report {
        command: "charfunc",
        config: config(vec![
            ("m", json!(a.m)),
            ("grid", json!(a.grid)),
            ("eta", json!(a.eta)),
            ("c2", json!(C2)),
        ]),
        result: json!({ "rows": rows }),
        table,
        human,
    })
}

#[derive(Args, Debug)]
pub struct SmallballArgs {
    /// Dimension of a random direction (ignored with --input).
    #[arg(long, required_unless_present = "input")]
    n: Option<usize>,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    seed: SeedArgs,
    /// Direction as a vector file; otherwise a uniform random unit vector
    /// drawn from the complement of --stream.
    #[arg(long)]
    input: Option<PathBuf>,
    /// With --beta, also report the LCD-conditioned bound value.
    #[arg(long, requires = "beta")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    beta: Option<f64>,
}

pub fn smallball(a: &SmallballArgs) -> Result<Report> {
    let s = a.seed.seed();
    let x = match (&a.input, a.n) {
        (Some(path), _) => read_vector(path, DEFAULT_PRECISION)?,
        (None, Some(n)) => random_unit_vector(n, s.with_stream(!s.stream), DEFAULT_PRECISION)?,
        (None, None) => return Err(Error::Domain("either --n or --input is required".into())),
    };
    let lcd = match (a.alpha, a.beta) {
        (Some(alpha), Some(beta)) => Some(LcdParams::new(alpha, beta)?),
        _ => None,
    };
    let r = small_ball_probe(&x, a.m, a.eps, a.trials, s, lcd)?;
    let mut human = format!(
        "Pr[|<X/m, x>| <= {}] ~ {:.6} 95% CI [{:.6}, {:.6}] ({} trials)\nesseen integral {:.6}\n",
        a.eps, r.mc.estimate, r.mc.ci_low, r.mc.ci_high, r.mc.trials, r.esseen_integral
    );
    if let Some(b) = r.lcd_bound {
        human.push_str(&format!("lcd bound value {b:.6}\n"));
    }
    let mut columns = ESTIMATE_COLUMNS.to_vec();
    columns.extend(["epsilon", "esseen_integral", "lcd_bound"]);
    let mut table = Table::new(&columns);
    let mut row = estimate_row(&r.mc);
    row.extend([
        a.eps.to_string(),
        r.esseen_integral.to_string(),
        r.lcd_bound.map(|b| b.to_string()).unwrap_or_default(),
    ]);
    table.push(row);
    Ok(Report {
        command: "smallball",
        config: config(vec![
            ("n", json!(x.len())),
            ("m", json!(a.m)),
            ("eps", json!(a.eps)),
            ("trials", json!(a.trials)),
            ("seed", seed_json(s)),
            ("input", path_json(&a.input)),
            ("alpha", json!(a.alpha)),
            ("beta", json!(a.beta)),
        ]),
        result: json!({
            "epsilon": r.epsilon,
            "epsilon_0": if a.m >= 2 { Some(epsilon_0(a.m)) } else { None },
            "mc": estimate_json(&r.mc),
            "esseen_integral": r.esseen_integral,
            "lcd_bound": r.lcd_bound,
        }),
        table,
        human,
    })
}

#[derive(Args, Debug)]
pub struct NormalVectorArgs {
    /// Matrix file with n - 1 rows; otherwise rows are sampled.
    #[arg(long, conflicts_with_all = ["n", "m"])]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "input", requires = "m")]
    n: Option<usize>,
    #[arg(long)]
    m: Option<u64>,
    #[command(flatten)]
    seed: SeedArgs,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Vector file to write.
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn normal_vector(a: &NormalVectorArgs) -> Result<Report> {
    let precision = check_precision(a.precision)?;
    let s = a.seed.seed();
    let x = match (&a.input, a.n, a.m) {
        (Some(path), _, _) => {
            let rows = read_matrix(path)?;
            if rows.rows() + 1 != rows.cols() {
                return Err(Error::Dimension(format!(
                    "normal vectors need an (n-1) x n matrix, got {}x{}",
                    rows.rows(),
                    rows.cols()
                )));
            }
            kernel_direction(&rows, precision)?
        }
        (None, Some(n), Some(m)) => random_normal_vector(n, m, s, precision)?,
        _ => return Err(Error::Domain("either --input or both --n and --m are required".into())),
    };
    if let Some(path) = &a.output {
        std::fs::write(path, x.to_string())?;
    }
    let decimals: Vec<String> = x.entries().iter().map(|e| e.to_string_radix(10, None)).collect();
    let mut table = Table::new(&["index", "value"]);
    for (i, d) in decimals.iter().enumerate() {
        table.push(vec![i.to_string(), d.clone()]);
    }
    Ok(Report {
        command: "normal-vector",
        config: config(vec![
            ("input", path_json(&a.input)),
            ("n", json!(x.len())),
            ("m", json!(a.m)),
            ("seed", if a.input.is_some() { Value::Null } else { seed_json(s) }),
            ("precision", json!(precision)),
            ("output", path_json(&a.output)),
        ]),
        result: json!({ "n": x.len(), "entries": decimals }),
        table,
        human: if a.output.is_some() {
            format!("wrote {}-dimensional unit vector\n", x.len())
        } else {
            x.to_string()
        },
    })
}
