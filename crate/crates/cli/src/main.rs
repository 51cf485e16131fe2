mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches};
use dyonlab_core::checks::DEFAULT_SEED;
use dyonlab_core::PhysicalConstants;

use crate::args::Cli;
use crate::commands::Ctx;
use crate::config::RunConfig;

/// Exit status for failed checks and runs that could not be completed.
const EXIT_FAILED: u8 = 1;
/// Exit status for bad input.
const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(dyonlab_core::Error),
    Io(std::io::Error),
}

impl From<dyonlab_core::Error> for CliError {
    fn from(e: dyonlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use dyonlab_core::Error as E;
        match self {
            CliError::Core(E::InvalidRun(_) | E::Instability { .. } | E::NoConvergence { .. }) => {
                EXIT_FAILED
            }
            _ => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DYONLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "DYONLAB_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(CliError::Usage)?,
        None => RunConfig::default(),
    };
    let consts = match cli.alpha.or(cfg.alpha) {
        Some(a) => PhysicalConstants::new(a)?,
        None => PhysicalConstants::default(),
    };
    let output = cfg.output.clone().unwrap_or_default();
    let ctx = Ctx {
        seed: cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        csv: cli.csv.clone().or(output.csv),
        consts,
        cfg,
    };
    let start = Instant::now();
    let mut report = commands::run(&cli.command, &ctx)?;
    if cli.timing {
        report.set_wall_time(start.elapsed().as_secs_f64());
    }
    report.emit(cli.out.as_deref().or(output.report.as_deref()))?;
    for (name, detail) in report.failures() {
        if detail.is_empty() {
            eprintln!("check failed: {name}");
        } else {
            eprintln!("check failed: {name}: {detail}");
        }
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    // negative flag values such as `--ng -1` are numbers on every subcommand
    let matches = Cli::command()
        .mut_subcommands(|s| s.allow_negative_numbers(true))
        .get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
