//! `epibif <command> --config <path> [--out <dir>] [--table T1|T2|T4] [--case N] [--strict]`
//!
//! Exit status: 0 success, 2 invalid configuration, 3 numerical or I/O
//! failure, 4 a reproduced table cell outside its tolerance.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;

use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "epibif", version, about = "Bifurcation analysis of small disease-dynamics models")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `options.out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table to reproduce; overrides `options.table`.
    #[arg(long)]
    table: Option<String>,
    /// Case number within the table; overrides `options.case`.
    #[arg(long)]
    case: Option<u32>,
    /// Treat undecided verdicts as failures; `reproduce` also repeats the
    /// simulated cells with 10x tighter integrator tolerances.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Numerical(m) => write!(f, "{m}"),
            Failure::Mismatch(m) => write!(f, "reproduction mismatch: {m}"),
        }
    }
}

impl From<epibif::Error> for Failure {
    fn from(e: epibif::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(&cli.config, cli.command)?;
    if let Some(t) = cli.table {
        if epibif::report::TableId::parse(&t).is_none() {
            return Err(Failure::Config(format!("--table: unknown table `{t}`")));
        }
        cfg.options.table = Some(t);
    }
    if cli.case.is_some() {
        cfg.options.case = cli.case;
    }
    let out = cli
        .out
        .or_else(|| cfg.options.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .map_err(|e| Failure::Numerical(format!("io error on {}: {e}", out.display())))?;
    let (lines, failure) = commands::execute(&cfg, &out, cli.strict)?;
    for line in lines {
        println!("{line}");
    }
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
