use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use memtoolbox::cli;

#[derive(Parser)]
#[command(name = "memtool", version, about = "Maximum-entropy-on-the-mean estimation")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a configuration file.
    Run { config: PathBuf },
    /// Generate synthetic data.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
    /// Compare analytic quantities against brute-force oracles.
    Oracle { config: PathBuf },
}

#[derive(Subcommand)]
enum Gen {
    /// Random binary signal with its Bernoulli parameter file.
    Barcode { config: PathBuf },
    /// Noisy observation of a known signal.
    Observation { config: PathBuf },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { cli::EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match args.command {
        Command::Run { config } => cli::run(&config).map(|s| {
            println!(
                "{} after {} iterations, objective {}",
                s.trace.reason.name(),
                s.trace.iterations,
                s.trace.records.last().map_or(f64::NAN, |r| r.objective)
            );
        }),
        Command::Gen { what: Gen::Barcode { config } } => cli::gen_barcode_cmd(&config).map(|d| println!("wrote {}", d.display())),
        Command::Gen { what: Gen::Observation { config } } => {
            cli::gen_observation_cmd(&config).map(|d| println!("wrote {}", d.display()))
        }
        Command::Oracle { config } => cli::oracle_cmd(&config).map(|r| println!("{} comparisons passed", r.rows.len())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
