mod commands;
mod grid;
mod output;
mod presets;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::OutputRecord;

#[derive(Debug, Parser)]
#[command(
    name = "binomci",
    version,
    about = "Binomial confidence intervals and their exact coverage",
    long_about = "Computes Clopper-Pearson, Massart (rigorous and tuned), Wald and Wilson \
                  intervals for a binomial proportion, evaluates their exact coverage and \
                  error probabilities, sweeps them over p or N, and tunes the Massart theta."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GlobalArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write the table to PATH instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Bisection tolerance (Clopper-Pearson limits and theta tuning)
    #[arg(long, default_value_t = 1e-10, global = true)]
    pub tol: f64,

    /// Seed for Monte Carlo runs
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,

    /// Override or add a tuned theta, as DELTA=THETA (repeatable)
    #[arg(long = "tuned-theta", value_name = "DELTA=THETA", global = true)]
    pub tuned_theta: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Confidence limits for one (N, k, delta)
    Interval(commands::IntervalArgs),
    /// Exact (and optionally Monte Carlo) coverage at one (N, p, delta)
    Coverage(commands::CoverageArgs),
    /// Limits over k, or coverage over p or N
    Sweep(commands::SweepArgs),
    /// Largest Massart theta keeping coverage >= 1 - delta on a grid
    Tune(commands::TuneArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<binomci::Error> for CliError {
    fn from(e: binomci::Error) -> Self {
        match e {
            binomci::Error::Infeasible(_) => CliError::Numerical(e.to_string()),
            binomci::Error::Domain(_) | binomci::Error::Config(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn emit(record: &OutputRecord, global: &GlobalArgs) -> Result<(), CliError> {
    let write = |w: &mut dyn Write| -> io::Result<()> {
        match global.format {
            Format::Csv => record.write_csv(&mut *w),
            Format::Json => record.write_json(&mut *w),
        }
    };
    match &global.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    if !(g.tol > 0.0 && g.tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol {} must be positive", g.tol)));
    }
    match &cli.command {
        Command::Interval(a) => emit(&commands::interval(a, g)?, g),
        Command::Coverage(a) => emit(&commands::coverage(a, g)?, g),
        Command::Tune(a) => emit(&commands::tune(a, g)?, g),
        Command::Sweep(a) => {
            let (record, summary) = commands::sweep(a, g)?;
            emit(&record, g)?;
            if g.out.is_some() {
                print!("{summary}");
            } else {
                eprint!("{summary}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("binomci: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
