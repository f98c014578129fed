//! Command-line front end: argument parsing, thread-pool setup, dispatch and
//! report rendering. [`run`] is the whole program minus process exit.

mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use intmat::{Error, Seed};

pub use output::{Format, VERSION};

#[derive(Parser, Debug)]
#[command(name = "intmat", version, about = "Exact experiments on random integer matrices")]
struct Cli {
    /// Worker threads (falls back to INTMAT_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit a JSON report.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV with `#` comment lines carrying the configuration.
    #[arg(long, global = true)]
    csv: bool,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
pub(crate) struct SeedArgs {
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generator stream.
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

impl SeedArgs {
    fn seed(&self) -> Seed {
        Seed::new(self.seed).with_stream(self.stream)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo estimate of Pr[det M = 0] for n x n matrices.
    Estimate(commands::EstimateArgs),
    /// Exact singular fraction by full enumeration.
    Exact(commands::ExactArgs),
    /// Fit p ~ m^(-c n) to estimates from a CSV file.
    Fit(commands::FitArgs),
    /// Verify or generate MDS matrices.
    #[command(subcommand)]
    Mds(commands::MdsCommand),
    /// Grid scan for the least common denominator of a unit vector.
    Lcd(commands::LcdArgs),
    /// Compressibility check of a unit vector.
    Compress(commands::CompressArgs),
    /// Tabulate F(y) and its decay bound G(m y) on [0, 1/2].
    Charfunc(commands::CharfuncArgs),
    /// Small-ball probability of <X/m, x> with the Esseen integral.
    Smallball(commands::SmallballArgs),
    /// Unit vector orthogonal to n - 1 integer rows.
    NormalVector(commands::NormalVectorArgs),
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Error> {
    let raw = match flag {
        Some(t) => Some(t),
        None => match std::env::var("INTMAT_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Domain(format!("INTMAT_THREADS must be a positive integer, got {v:?}")))?,
            ),
            _ => None,
        },
    };
    match raw {
        Some(0) => Err(Error::Domain("thread count must be at least 1".into())),
        other => Ok(other),
    }
}

fn execute(cli: &Cli) -> Result<output::Report, Error> {
    match &cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Exact(a) => commands::exact(a),
        Command::Fit(a) => commands::fit(a),
        Command::Mds(c) => commands::mds(c),
        Command::Lcd(a) => commands::lcd(a),
        Command::Compress(a) => commands::compress(a),
        Command::Charfunc(a) => commands::charfunc(a),
        Command::Smallball(a) => commands::smallball(a),
        Command::NormalVector(a) => commands::normal_vector(a),
    }
}

fn run_parsed(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Error> {
    let threads = thread_count(cli.threads)?;
    let report = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start {t} threads: {e}")))?
            .install(|| execute(cli))?,
        None => execute(cli)?,
    };
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Human
    };
    let text = output::render(&report, format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code: 0 on success, 1 on usage or domain errors, 2 when a budget or
/// attempt limit was exhausted.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    match run_parsed(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "intmat: {e}");
            if e.is_resource_failure() {
                2
            } else {
                1
            }
        }
    }
}
