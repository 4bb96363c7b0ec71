//! Command-line front end: configuration, dispatch and CSV output.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad configuration or usage,
//! 3 numerical failure, 4 self-check breach.

mod commands;
pub mod config;
mod figures;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;

pub use config::{Overrides, Resolved, RunConfig};

#[derive(Debug, Clone, Parser)]
#[command(name = "lifesurplus", version, about = "Policy values, surplus and bonus for single-life contracts")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Mesh step in years.
    #[arg(long, global = true, value_name = "H")]
    pub mesh: Option<f64>,
    /// Monte Carlo paths.
    #[arg(long, global = true, value_name = "K")]
    pub paths: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Cross-check results against independent computations.
    #[arg(long, global = true)]
    pub self_check: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Level premium by the equivalence principle.
    Premium,
    /// Policy values, passivum and activum.
    PolicyValue,
    /// Retrospective accumulations.
    Accumulation,
    /// Systematic surplus and modeled surplus.
    Surplus,
    /// Monte Carlo surplus paths.
    Simulate,
    /// Paid-up values and premium decompositions.
    Paidup,
    /// Surplus with reversionary bonus.
    Bonus,
    /// Write the data behind a figure (1, 2, 3 or 4).
    ReproduceFigure { figure: u8 },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// One self-check comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {}: {:.3e} (tolerance {:.3e})",
            if self.passed() { "ok" } else { "BREACH" },
            self.name,
            self.error,
            self.tolerance
        )
    }
}

/// What a successful run produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            4
        }
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, error: f64, tolerance: f64) {
        let error = if error.is_nan() { f64::INFINITY } else { error };
        self.checks.push(Check {
            name: name.into(),
            error,
            tolerance,
        });
    }

    pub(crate) fn write_csv(
        &mut self,
        dir: &Path,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }
}

/// Fixed scientific format with 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            mesh: self.mesh,
            paths: self.paths,
            seed: self.seed,
        }
    }

    fn resolved(&self) -> Result<Resolved, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs --config <path>".into()))?;
        let (config, source) = config::load(path)?;
        config.resolve(&source, &self.overrides()).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// Runs one command. Self-check results are in the outcome; a breach is
/// not an error here.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Command::ReproduceFigure { figure } = cli.command {
        return figures::reproduce(figure, cli);
    }
    let r = cli.resolved()?;
    let mut out = Outcome::default();
    match cli.command {
        Command::Premium => commands::premium(&r, cli.self_check, &mut out)?,
        Command::PolicyValue => commands::policy_value(&r, cli.self_check, &mut out)?,
        Command::Accumulation => commands::accumulation(&r, cli.self_check, &mut out)?,
        Command::Surplus => commands::surplus(&r, cli.self_check, &mut out)?,
        Command::Simulate => commands::simulate(&r, cli.self_check, &mut out)?,
        Command::Paidup => commands::paidup(&r, cli.self_check, &mut out)?,
        Command::Bonus => commands::bonus(&r, cli.self_check, &mut out)?,
        Command::ReproduceFigure { .. } => unreachable!(),
    }
    Ok(out)
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            for c in &outcome.checks {
                eprintln!("{c}");
            }
            println!("{}", outcome.summary);
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
