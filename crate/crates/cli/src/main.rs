use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use triality_cli::{execute, Command, Overrides};

#[derive(Parser)]
#[command(name = "triality", version, about = "Multipath complementarity measures and interferometer protocols")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a scenario key by dotted path, e.g. protocol.samples=100000.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out_json: Option<PathBuf>,
    /// Write the command's CSV data here.
    #[arg(long, global = true, value_name = "PATH")]
    out_csv: Option<PathBuf>,
    /// Seed for every random choice (sets protocol.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Global and pairwise measures of one state and detector.
    Measures,
    /// Open every pair of paths and rebuild the global measures.
    Campaign,
    /// Intensity scan and fringe contrast.
    Scan,
    /// Phase-averaged intensity variance and the visibility it implies.
    Variance,
    /// Phase flip plus selective decoherence of one path.
    Meiweitz,
    /// Compare closed forms with the brute-force oracles.
    Verify,
    /// Identity residuals over seeded random instances.
    RandomSweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Measures => Command::Measures,
            Cmd::Campaign => Command::Campaign,
            Cmd::Scan => Command::Scan,
            Cmd::Variance => Command::Variance,
            Cmd::Meiweitz => Command::Meiweitz,
            Cmd::Verify => Command::Verify,
            Cmd::RandomSweep => Command::RandomSweep,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ov = Overrides {
        sets: cli.common.sets,
        seed: cli.common.seed,
        out_json: cli.common.out_json,
        out_csv: cli.common.out_csv,
    };
    match execute(cli.command.into(), cli.common.config.as_deref(), &ov) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
