//! `mfpt`: single-point solves, series dumps, the reference table, coupling
//! sweeps and exact-diagonalization runs.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfpt::scalar::{parse_rational, rational_to_f64};
use mfpt::{ErrorCategory, OscillatorKind, Rational};

#[derive(Parser, Debug)]
#[command(
    name = "mfpt",
    version,
    about = "Mean-field perturbation theory for anharmonic oscillators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean-field solution, corrections and resummed energy at one coupling
    Solve(SolveArgs),
    /// Dump the correction series
    Series(SeriesArgs),
    /// Recompute the reference table and flag deviations
    Table1(TableArgs),
    /// Energies over a grid of couplings
    Sweep(SweepArgs),
    /// Exact diagonalization in a harmonic basis
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Mot,
    Borel,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Decimal digits for extended-precision arithmetic
    #[arg(long, env = "MFPT_PRECISION", default_value_t = mfpt::scalar::DEFAULT_DIGITS, value_parser = clap::value_parser!(u32).range(10..=10000))]
    pub precision: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct System {
    /// qaho, saho or qdwo
    #[arg(long, value_parser = parse_kind)]
    pub kind: OscillatorKind,
    /// Coupling, as a decimal or p/q
    #[arg(long, value_parser = parse_positive_rational)]
    pub g: Rational,
    /// Level
    #[arg(long, default_value_t = 0)]
    pub n: u32,
}

#[derive(Args, Debug, Clone)]
pub struct Resummation {
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    /// Borel exponent (default 1, or 1/2 for the sextic oscillator)
    #[arg(long, value_parser = parse_positive_rational)]
    pub gamma: Option<Rational>,
    /// Borel radius; estimated from the series when omitted
    #[arg(long, value_parser = parse_positive_f64)]
    pub rc: Option<f64>,
    /// Number of Borel terms
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..=400))]
    pub nc: u64,
    /// Upper cutoff 1 - epsilon of the mapped integral
    #[arg(long, default_value_t = mfpt::resum::DEFAULT_EPSILON, value_parser = parse_unit_interval)]
    pub epsilon: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub system: System,
    /// Highest correction order reported
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..=2000))]
    pub orders: u64,
    #[command(flatten)]
    pub resum: Resummation,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub system: System,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..=2000))]
    pub orders: u64,
    /// Also re-run at 40 extra digits and report the digits that agree
    #[arg(long)]
    pub certify: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct TableArgs {
    #[arg(long, default_value_t = mfpt::resum::DEFAULT_EPSILON, value_parser = parse_unit_interval)]
    pub epsilon: f64,
    /// Initial basis size for the exact column
    #[arg(long, default_value_t = mfpt::oracle::DEFAULT_BASIS_SIZE, value_parser = parse_basis)]
    pub basis: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// qaho, saho or qdwo
    #[arg(long, value_parser = parse_kind)]
    pub kind: OscillatorKind,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    /// start:stop:log|lin:count
    #[arg(long, value_parser = parse_grid)]
    pub g_grid: Grid,
    /// Orders computed per point
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(4..=2000))]
    pub orders: u64,
    #[command(flatten)]
    pub resum: Resummation,
    #[arg(long, default_value_t = mfpt::oracle::DEFAULT_BASIS_SIZE, value_parser = parse_basis)]
    pub basis: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[command(flatten)]
    pub system: System,
    /// Initial basis size, doubled until converged
    #[arg(long, default_value_t = mfpt::oracle::DEFAULT_BASIS_SIZE, value_parser = parse_basis)]
    pub basis: usize,
    /// Basis frequency (default max(1, ω))
    #[arg(long, value_parser = parse_positive_f64)]
    pub basis_omega: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub log: bool,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                let x = if self.log {
                    self.start * (self.stop / self.start).powf(t)
                } else {
                    self.start + (self.stop - self.start) * t
                };
                // drop round-off noise so 1.0 does not print as 0.9999999999999998
                format!("{x:.11e}").parse().unwrap_or(x)
            })
            .collect()
    }
}

fn parse_kind(s: &str) -> Result<OscillatorKind, String> {
    s.parse().map_err(|e: mfpt::Error| e.to_string())
}

fn parse_positive_rational(s: &str) -> Result<Rational, String> {
    let q = parse_rational(s).map_err(|e| e.to_string())?;
    if q <= 0 {
        return Err(format!("must be positive, got {s}"));
    }
    Ok(q)
}

fn parse_positive_f64(s: &str) -> Result<f64, String> {
    Ok(rational_to_f64(&parse_positive_rational(s)?))
}

fn parse_unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {s}"))
    }
}

fn parse_basis(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("not a basis size: {s}"))?;
    if n < 4 {
        return Err("basis needs at least 4 states".into());
    }
    Ok(n)
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, scale, count] = parts[..] else {
        return Err(format!("expected start:stop:log|lin:count, got {s}"));
    };
    let start = parse_positive_f64(start)?;
    let stop = parse_positive_f64(stop)?;
    let log = match scale {
        "log" => true,
        "lin" => false,
        other => return Err(format!("grid scale must be log or lin, got {other}")),
    };
    let count: usize = count
        .parse()
        .map_err(|_| format!("bad point count {count}"))?;
    if count == 0 {
        return Err("grid needs at least one point".into());
    }
    Ok(Grid {
        start,
        stop,
        log,
        count,
    })
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Usage => 2,
        ErrorCategory::Domain => 3,
        ErrorCategory::Convergence => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, common) = match &cli.command {
        Command::Solve(a) => (commands::solve(a), &a.common),
        Command::Series(a) => (commands::series(a), &a.common),
        Command::Table1(a) => (commands::table1(a), &a.common),
        Command::Sweep(a) => (commands::sweep(a), &a.common),
        Command::Oracle(a) => (commands::oracle(a), &a.common),
    };
    let rendered = match result {
        Ok(doc) => doc.render(common.format),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(e.category()));
        }
    };
    match output::emit(&rendered, common.out.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(2)
        }
    }
}
