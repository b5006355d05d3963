//! `qcurv` — runs the verification suites and writes a machine-readable report.
//!
//! Exit status: 0 when every check passes, 1 when some check fails, 2 on a
//! usage or input error.

mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use num_rational::Ratio;
use serde::Serialize;

use report::{CheckRecord, RunReport};
use suites::SolveArgs;

#[derive(Parser, Debug)]
#[command(name = "qcurv", version, about = "Verification suites for constant Q-curvature gluing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Exact curvature identities for product and Einstein models.
    VerifyExamples,
    /// Radial Green's function of the Paneitz operator.
    VerifyGreen,
    /// Scaling of the neck-metric error in the gluing parameter b.
    NeckScaling,
    /// Fixed-point solve for constant Q on a perturbed round sphere.
    Solve,
    /// Every suite with the given flags.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::VerifyExamples => "verify-examples",
            Command::VerifyGreen => "verify-green",
            Command::NeckScaling => "neck-scaling",
            Command::Solve => "solve",
            Command::All => "all",
        }
    }
}

#[derive(clap::Args, Debug, Clone)]
struct Flags {
    /// Dimension (at least 6).
    #[arg(long, global = true, default_value_t = 6)]
    n: usize,
    /// Comma-separated neck parameters b as exact rationals, e.g. 1/32,1/64.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_b)]
    b_list: Vec<Ratio<i64>>,
    /// Weight exponent of the neck norm.
    #[arg(long, global = true, default_value_t = -0.5, allow_negative_numbers = true)]
    delta: f64,
    /// Spectral truncation degree for the solver.
    #[arg(long, global = true, default_value_t = 64)]
    lmax: usize,
    /// Residual tolerance for the solver.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Amplitude of the zonal perturbation to solve against (0 is the round sphere).
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    amplitude: f64,
    /// Degree of the zonal perturbation.
    #[arg(long, global = true, default_value_t = 2)]
    mode: usize,
    /// Report path; `.csv` selects CSV, anything else JSON. Stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the Green's function profile (r, G, F).
    #[arg(long, global = true)]
    profile_csv: Option<PathBuf>,
    /// Write the neck sweep table (b, quantity, value).
    #[arg(long, global = true)]
    table_csv: Option<PathBuf>,
    /// Write the solver trace (iteration, residual, ratio, min_u).
    #[arg(long, global = true)]
    trace_csv: Option<PathBuf>,
}

fn parse_b(s: &str) -> Result<Ratio<i64>, String> {
    let b: Ratio<i64> = s.trim().parse().map_err(|_| format!("'{s}' is not a rational p/q"))?;
    if b <= Ratio::from_integer(0) || b >= Ratio::new(1, 4) {
        return Err(format!("b = {b} must lie in (0, 1/4)"));
    }
    Ok(b)
}

fn default_b_list() -> Vec<Ratio<i64>> {
    (5..=9).map(|k| Ratio::new(1, 1 << k)).collect()
}

#[derive(Serialize)]
struct ConfigEcho {
    n: usize,
    b_list: Vec<String>,
    delta: f64,
    lmax: usize,
    tol: f64,
    amplitude: f64,
    mode: usize,
    seed: u64,
}

fn run(command: Command, flags: &Flags) -> Result<RunReport<ConfigEcho>> {
    if flags.n < 6 {
        bail!("--n must be at least 6, got {}", flags.n);
    }
    if !(flags.tol > 0.0) {
        bail!("--tol must be positive");
    }
    let mut b_list = if flags.b_list.is_empty() { default_b_list() } else { flags.b_list.clone() };
    b_list.sort_by(|x, y| y.cmp(x));
    b_list.dedup();
    if b_list.len() < 2 {
        bail!("--b-list needs at least two distinct values");
    }
    let solve_args =
        SolveArgs { n: flags.n, lmax: flags.lmax, tol: flags.tol, amplitude: flags.amplitude, mode: flags.mode };

    let mut checks: Vec<CheckRecord> = Vec::new();
    let want = |c: Command| command == c || command == Command::All;
    if want(Command::VerifyExamples) {
        checks.extend(suites::verify_examples(flags.n, flags.seed)?);
    }
    if want(Command::VerifyGreen) {
        checks.extend(suites::verify_green(flags.n, flags.profile_csv.as_ref())?);
    }
    if want(Command::NeckScaling) {
        checks.extend(suites::neck_scaling(flags.n, &b_list, flags.delta, flags.table_csv.as_ref())?);
    }
    if want(Command::Solve) {
        checks.extend(suites::solve(&solve_args, flags.trace_csv.as_ref())?);
    }
    let config = ConfigEcho {
        n: flags.n,
        b_list: b_list.iter().map(|b| format!("{}/{}", b.numer(), b.denom())).collect(),
        delta: flags.delta,
        lmax: flags.lmax,
        tol: flags.tol,
        amplitude: flags.amplitude,
        mode: flags.mode,
        seed: flags.seed,
    };
    Ok(RunReport::new(command.name(), config, checks))
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QCURV_THREADS") {
        let threads: usize = v.parse().map_err(|_| anyhow::anyhow!("QCURV_THREADS must be a positive integer"))?;
        if threads == 0 {
            bail!("QCURV_THREADS must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = configure_threads().and_then(|_| {
        let report = run(cli.command, &cli.flags)?;
        match &cli.flags.out {
            Some(path) => report.write(path)?,
            None => print!("{}", report.to_json()?),
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: expected {}, measured {}", c.id, c.expected, c.measured);
            }
            eprintln!(
                "{}: {}/{} checks passed in {:.2}s",
                report.suite,
                report.checks.iter().filter(|c| c.pass).count(),
                report.checks.len(),
                start.elapsed().as_secs_f64()
            );
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
