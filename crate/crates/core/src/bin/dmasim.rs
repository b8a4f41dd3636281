use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dmalink::harness::{self, HarnessError, Scenario};
use dmalink::optimize::Strategy;

/// DMA link simulator: configuration strategies, spectra and jammed OFDM BER.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one strategy at one frequency and store it in the codebook.
    Optimize {
        config: PathBuf,
        strategy: Strategy,
        /// Operating frequency, GHz.
        f_op_ghz: f64,
    },
    /// Sweep the channel spectra of a stored configuration.
    SweepSpectrum { config: PathBuf, strategy: Strategy, f_op_ghz: f64 },
    /// Measure BER for a stored configuration at one jamming level.
    RunLink {
        config: PathBuf,
        strategy: Strategy,
        f_op_ghz: f64,
        /// Jammer power relative to the desired signal, dB.
        #[arg(allow_negative_numbers = true)]
        jam_rel_db: f64,
    },
    /// Run every stage for every frequency, strategy and jamming level.
    FullExperiment { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Optimize { config, strategy, f_op_ghz } => {
            let scenario = Scenario::load(&config)?;
            let entry = harness::subcommand_optimize(&scenario, strategy, f_op_ghz * 1e9)?;
            println!("{strategy} at {f_op_ghz} GHz: cost {:.2} dB, {} oracle calls", entry.cost, entry.oracle_calls);
        }
        Command::SweepSpectrum { config, strategy, f_op_ghz } => {
            let scenario = Scenario::load(&config)?;
            let rows = harness::subcommand_sweep_spectrum(&scenario, strategy, f_op_ghz * 1e9)?;
            println!("wrote {} spectrum points to {}", rows.len(), scenario.output_dir.display());
        }
        Command::RunLink { config, strategy, f_op_ghz, jam_rel_db } => {
            let scenario = Scenario::load(&config)?;
            let (row, run) = harness::subcommand_run_link(&scenario, strategy, f_op_ghz * 1e9, jam_rel_db)?;
            println!(
                "{strategy} at {f_op_ghz} GHz, jammer {jam_rel_db} dB: {} errors in {} bits, BER {:.3e}{}",
                row.bits_error,
                row.bits_total,
                row.ber,
                if row.valid { "" } else { " (fewer than 100 errors)" }
            );
            if run.sync_failures > 0 {
                println!("{} of {} frames failed to synchronize", run.sync_failures, run.frames);
            }
        }
        Command::FullExperiment { config } => {
            let scenario = Scenario::load(&config)?;
            let out = harness::run_full_experiment(&scenario)?;
            println!("wrote {} files to {}", out.manifest.files.len() + 1, scenario.output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
