use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use free_transmission::cli::{run, Command, RunArgs};

#[derive(Parser)]
#[command(name = "ftsolve", version, about = "Two-phase fully nonlinear free transmission solver")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the ε-continuation and write fields plus report.json
    Solve(Args),
    /// Sample the structural assumptions and write report.json
    Check(Args),
    /// Sweep grid sizes and ε floors, write study.csv and study.json
    Study(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let (cmd, a) = match Cli::parse().command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Study(a) => (Command::Study, a),
    };
    let args = RunArgs {
        config: a.config,
        out: a.out,
        seed: a.seed,
        threads: a.threads,
    };
    ExitCode::from(run(cmd, &args) as u8)
}
