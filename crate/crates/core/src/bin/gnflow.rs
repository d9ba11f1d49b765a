use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gnflow::app::{execute, Command, Overrides};

/// Lagrangian flow-map solver for the 1D Green–Naghdi equations.
#[derive(Parser)]
#[command(name = "gnflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a scenario and write fields.csv, diagnostics.csv, summary.json.
    Run(CommonArgs),
    /// Run the Lagrangian solver and the Eulerian oracle side by side; writes compare.csv.
    Compare(CommonArgs),
    /// Run the refinement ladder of the [converge] section; writes converge.csv.
    Converge(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Overrides `output.directory`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `scenario.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Run(a) => (Command::Run, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Converge(a) => (Command::Converge, a),
    };
    let overrides = Overrides { output_dir: args.output_dir, seed: args.seed };
    let report = execute(command, &args.config, &overrides);
    let summary = &report.summary;
    match &summary.message {
        Some(msg) => eprintln!("gnflow: {}: {msg}", summary.termination),
        None => eprintln!("gnflow: {} at t = {}", summary.termination, summary.final_time),
    }
    ExitCode::from(report.status.code() as u8)
}
