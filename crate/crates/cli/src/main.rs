//! arcspin: lattice spin toolkit driver.
//!
//! Every subcommand writes a CSV data file (with the resolved configuration
//! echoed as `# key=value` header lines) plus a JSON run summary. Parameters
//! come from flags, or from a TOML file via --config with flags taking
//! precedence. Exit codes: 0 success, 2 validation error, 3 numeric failure.

mod commands;
mod output;

use clap::{Parser, Subcommand};
use output::OutputPaths;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "arcspin", version, about = "XY/clock discretisation toolkit")]
struct Cli {
    /// TOML file with the subcommand's parameters (flags override it)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: $ARCSPIN_OUT_DIR, then the working dir)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Basename for the CSV/JSON outputs (default: the subcommand name)
    #[arg(long, global = true)]
    output: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form Gibbsianness criterion table over a (beta, q) sweep
    Criterion(commands::CriterionOpts),
    /// Numeric Dobrushin row sums over a (beta, q) sweep
    Dobrushin(commands::DobrushinOpts),
    /// Variational-lemma maximiser for the Q functional
    Lemma(commands::LemmaOpts),
    /// Constrained double-well barrier heights and their log-log slope
    Gap(commands::GapOpts),
    /// MCMC sampling with per-sweep observable series
    Sample(commands::SampleOpts),
    /// Projected-XY versus clock-chain MCMC comparison
    Compare(commands::CompareOpts),
    /// Exact oracles: enumeration and chain transfer operators
    Oracle(commands::OracleOpts),
    /// Conditional-probability sensitivity to a distant label flip
    Quasilocality(commands::QuasilocalityOpts),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Criterion(_) => "criterion",
            Command::Dobrushin(_) => "dobrushin",
            Command::Lemma(_) => "lemma",
            Command::Gap(_) => "gap",
            Command::Sample(_) => "sample",
            Command::Compare(_) => "compare",
            Command::Oracle(_) => "oracle",
            Command::Quasilocality(_) => "quasilocality",
        }
    }
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Numeric failures get exit code 3; anything that smells like bad inputs
/// or bad configuration is a validation failure with exit code 2.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<arcspin::Error>() {
            return match core {
                arcspin::Error::NonFinite(_) => EXIT_NUMERIC,
                _ => EXIT_VALIDATION,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_NUMERIC;
        }
    }
    EXIT_VALIDATION
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let started = Instant::now();
    let paths = OutputPaths::resolve(
        cli.out_dir.as_deref(),
        cli.output.as_deref().unwrap_or(cli.command.name()),
    );
    paths.check_writable()?;

    let file = cli.config.as_deref();
    let report = match cli.command {
        Command::Criterion(opts) => {
            commands::run_criterion(opts, commands::parse_file_opts(file)?)?
        }
        Command::Dobrushin(opts) => {
            commands::run_dobrushin(opts, commands::parse_file_opts(file)?)?
        }
        Command::Lemma(opts) => commands::run_lemma(opts, commands::parse_file_opts(file)?)?,
        Command::Gap(opts) => commands::run_gap(opts, commands::parse_file_opts(file)?)?,
        Command::Sample(opts) => commands::run_sample(opts, commands::parse_file_opts(file)?)?,
        Command::Compare(opts) => commands::run_compare(opts, commands::parse_file_opts(file)?)?,
        Command::Oracle(opts) => commands::run_oracle(opts, commands::parse_file_opts(file)?)?,
        Command::Quasilocality(opts) => {
            commands::run_quasilocality(opts, commands::parse_file_opts(file)?)?
        }
    };

    report.write(&paths, started)?;
    println!(
        "wrote {} ({} rows) and {}",
        paths.csv.display(),
        report.csv_rows.len(),
        paths.json.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
