use std::path::PathBuf;
use std::process::ExitCode;

use bell_lab_cli::config::SEED_ENV;
use bell_lab_cli::{run_command, Overrides};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bell-lab", version, about = "Run locality and Bell-inequality experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// json or csv.
        #[arg(long)]
        format: Option<String>,
        /// Worker threads; results do not depend on this.
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        workers: Option<u16>,
        /// Seed override, ahead of BELL_LAB_SEED and the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config, out, format, workers, seed } => {
            let overrides = Overrides { out, format, seed_flag: seed, seed_env: std::env::var(SEED_ENV).ok() };
            run_command(&config, &overrides, workers.map(usize::from))
        }
    }
}
