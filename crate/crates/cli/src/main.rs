use std::path::PathBuf;
use std::process::ExitCode;

use acma_cli::{execute, parse_config, Command, Overrides};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "acma", version, about = "ACMA link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Search the phase offsets for the manifest's system
    Optimize(Args),
    /// Precompute the offset lookup table
    Lookup(Args),
    /// Dump the composite constellation
    Constellation(Args),
    /// SER against SNR for every listed scheme
    Ser(Args),
    /// SER against alpha_1 at a single SNR
    AlphaSweep(Args),
    /// Sum throughput against SNR
    Throughput(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Experiment manifest (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the manifest
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the simulation
    #[arg(long)]
    workers: Option<usize>,
    /// Symbols per grid point
    #[arg(long)]
    symbols: Option<u64>,
    /// Errors per user required before a grid point stops
    #[arg(long)]
    min_errors: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Sub::Optimize(a) => (Command::Optimize, a),
        Sub::Lookup(a) => (Command::Lookup, a),
        Sub::Constellation(a) => (Command::Constellation, a),
        Sub::Ser(a) => (Command::Ser, a),
        Sub::AlphaSweep(a) => (Command::AlphaSweep, a),
        Sub::Throughput(a) => (Command::Throughput, a),
    };
    let overrides = Overrides {
        out: args.out,
        seed: args.seed,
        symbols: args.symbols,
        min_errors: args.min_errors,
        workers: args.workers,
    };
    let result = parse_config(&args.config).and_then(|m| execute(command, m, &overrides));
    match result {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
