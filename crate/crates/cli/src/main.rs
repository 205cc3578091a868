//! `degenspread` command-line front end.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub const EXIT_VERDICT: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "degenspread", version, about = "Degeneracy, spread and threshold tooling for uniform hypergraphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Emit the full JSON report instead of the short summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the main report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a run manifest (parameters, seeds, input and output digests, timestamps).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Search budget in nodes.
    #[arg(long, global = true, env = "DEGENSPREAD_BUDGET")]
    pub budget: Option<u64>,
    /// Include per-trial elapsed times in trial records.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a fixture in the text format.
    Gen(commands::GenArgs),
    /// Maximum density m_i.
    Density(commands::DensityArgs),
    /// Expectation threshold p_E.
    Pe(commands::PeArgs),
    /// Minimum deficiency, degeneracy certificate and optional boundary audit.
    AuditDegeneracy(commands::AuditDegeneracyArgs),
    /// Spread audit of the uniform embedding distribution of a pattern in a host.
    SpreadAudit(commands::SpreadAuditArgs),
    /// Level schedule r_0 > ... > r_l = 1.
    Schedule(commands::ScheduleArgs),
    /// Check counting bounds against exact enumeration.
    VerifyBounds(commands::VerifyBoundsArgs),
    /// Monte Carlo containment thresholds of spanning structures.
    ThresholdScan(commands::ThresholdScanArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Density(_) => "density",
            Command::Pe(_) => "pe",
            Command::AuditDegeneracy(_) => "audit-degeneracy",
            Command::SpreadAudit(_) => "spread-audit",
            Command::Schedule(_) => "schedule",
            Command::VerifyBounds(_) => "verify-bounds",
            Command::ThresholdScan(_) => "threshold-scan",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Some(w) = cli.global.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match commands::run(cli.command.name(), &cli.command, &cli.global) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
