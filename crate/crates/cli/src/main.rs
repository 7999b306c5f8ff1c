//! `landau`: sweeps, figure data, propagation checks, Hartree runs and
//! collapsing-estimate ensembles, written as CSV or JSON.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
//! 3 numerical domain error, 4 divergence.

mod commands;
mod config;
mod output;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ConfigError;
use landau_core::Error;

#[derive(Parser)]
#[command(name = "landau", version, about = "Landau-level spectral toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutDir {
    /// Output directory (created if missing).
    #[arg(long, global = false)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compare weighted Laguerre maxima with a closed-form bound.
    Bounds {
        #[arg(long, default_value = "lemma41")]
        kind: String,
        #[arg(long, value_parser = parse_range, default_value = "0..60")]
        n: RangeInclusive<usize>,
        /// Laguerre parameter range (alias `--j`).
        #[arg(long, alias = "j", value_parser = parse_range, default_value = "0..60")]
        alpha: RangeInclusive<usize>,
        /// Comma-separated derivative orders.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        c: Vec<f64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Data behind the two panels of the Laguerre-maximum growth figure.
    Figure2 {
        #[arg(long, value_parser = ["a", "b"])]
        panel: String,
        #[arg(long, value_parser = parse_range, default_value = "20")]
        n: RangeInclusive<usize>,
        #[arg(long, value_parser = parse_range, default_value = "0..200")]
        j: RangeInclusive<usize>,
        /// Derivative orders for panel b.
        #[arg(long, value_delimiter = ',', default_value = "1,1.5,2")]
        c: Vec<f64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Kernel-form against spectral-form free evolution of a sample state.
    Propagate {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        j: usize,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.7,2.0")]
        t: Vec<f64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Integrate the perturbation equation around a stationary state.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Ensemble of collapsing-estimate ratios.
    Collapse {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated derivative orders.
        #[arg(long, value_delimiter = ',', default_value = "1.125")]
        c: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 100)]
        ensemble: usize,
        /// Overrides `initial_q.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Gram, eigen-residual and propagator diagnostics of a truncation.
    BasisCheck {
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 6)]
        j: usize,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// Grid half-width; the truncation's default when absent.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[command(flatten)]
        out: OutDir,
    },
}

/// `A..B` (inclusive) or a single integer.
fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("'{x}' is not a non-negative integer"));
    let r = match s.split_once("..") {
        Some((a, b)) => parse(a)?..=parse(b.trim_start_matches('='))?,
        None => {
            let v = parse(s)?;
            v..=v
        }
    };
    if r.is_empty() {
        return Err(format!("range '{s}' is empty"));
    }
    Ok(r)
}

pub enum CliError {
    Core(Error),
    Config(ConfigError),
    Io(std::io::Error),
    /// Computation finished but a diagnostic gate failed.
    Gate(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) | CliError::Core(Error::Parameter(_)) => 2,
            CliError::Core(Error::Domain(_) | Error::NearCaustic { .. }) | CliError::Gate(_) => 3,
            CliError::Core(Error::Divergence { .. }) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Config(e) => e.to_string(),
            CliError::Io(e) => format!("i/o error: {e}"),
            CliError::Gate(m) => format!("diagnostic gate failed: {m}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = |o: OutDir| o.out.unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Bounds { kind, n, alpha, c, out: o } => commands::bounds(&kind, n, alpha, &c, &out(o)),
        Command::Figure2 { panel, n, j, c, out: o } => commands::figure2(&panel, n, j, &c, &out(o)),
        Command::Propagate { k, j, b, t, out: o } => commands::propagate(k, j, b, &t, &out(o)),
        Command::Simulate { config, out: o } => {
            let cfg = config::RunConfig::load(config.as_deref(), std::env::vars())?;
            let dir = o.out.unwrap_or_else(|| cfg.outputs.clone());
            commands::simulate(&cfg, &dir)
        }
        Command::Collapse { config, c, s, ensemble, seed, out: o } => {
            let cfg = config::RunConfig::load(config.as_deref(), std::env::vars())?;
            let dir = o.out.unwrap_or_else(|| cfg.outputs.clone());
            commands::collapse(&cfg, &c, s, ensemble, seed, &dir)
        }
        Command::BasisCheck { k, j, b, radius, n, out: o } => commands::basis_check(k, j, b, radius, n, &out(o)),
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
            eprintln!("landau: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..100").unwrap(), 1..=100);
        assert_eq!(parse_range("1..=3").unwrap(), 1..=3);
        assert_eq!(parse_range("20").unwrap(), 20..=20);
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("a..3").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::Parameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::NearCaustic { t: 1.0, sin_bt: 0.0 }).exit_code(), 3);
        assert_eq!(CliError::from(Error::Divergence { step: 1, detail: "x".into() }).exit_code(), 4);
        assert_eq!(CliError::from(ConfigError("x".into())).exit_code(), 2);
    }
}
