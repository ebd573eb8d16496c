use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use freetrans_cli::{load_config, run, RunOptions};

/// Runs one solver or diagnostics command described by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "freetrans", version)]
struct Args {
    /// Run config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave wall-clock rows out of the report so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
    /// Seed for pair sampling; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load_config(&args.config) {
        Ok(c) => c,
        Err(reason) => {
            eprintln!("freetrans: status=2 reason={reason}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions { out_dir: args.out, deterministic: args.deterministic, seed: args.seed };
    let outcome = run(&config, &opts);
    if let Some(reason) = &outcome.reason {
        eprintln!("freetrans: status={} reason={reason}", outcome.status);
    }
    ExitCode::from(outcome.status as u8)
}
