use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use decimarket::verify::PayoutMode;
use decimarket_cli::{run, verify};

/// Securities-based decision markets: run scenarios and verify payoff
/// equivalence. Set RUST_LOG=info (or debug) for progress output.
#[derive(Parser)]
#[command(name = "decimarket", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and write CSV reports.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `settlement.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check expected-payoff equivalence on random instances.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        instances: u64,
        /// Pay 1 per winning security instead of 1 / phi_j.
        #[arg(long, hide = true)]
        unscaled_payout: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed } => run(&config, &out, seed).map(|s| {
            println!(
                "{} trades settled at phi = {:?}; wrote {} files to {}",
                s.trades,
                s.phi,
                s.files.len(),
                out.display()
            );
            true
        }),
        Command::Verify {
            seed,
            instances,
            unscaled_payout,
        } => {
            let mode = if unscaled_payout {
                PayoutMode::Unit
            } else {
                PayoutMode::Scaled
            };
            let passed = verify(seed, instances as usize, mode, &mut io::stdout().lock());
            if let Ok(p) = passed {
                eprintln!(
                    "{instances} instances checked: {}",
                    if p { "all passed" } else { "violations found" }
                );
            }
            passed
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
