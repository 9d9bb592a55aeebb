//! `ctxrec` — experiment runner CLI.
//!
//! Verbs: `run`, `validate`, `synth`, `report`. Exit code 0 on success,
//! 1 on validation errors, 2 on runtime failures. CTXREC_THREADS caps the
//! evaluation worker count.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ctxrec_core::data::generate_synthetic;
use ctxrec_core::rng::child_seed;
use ctxrec_harness::{
    config::DatasetSource, emit_reports, run_experiment, write_dataset_tsv, ExperimentConfig,
    HarnessError,
};

#[derive(Parser)]
#[command(name = "ctxrec", version, about = "Context-aware POI recommendation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and emit all reports.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parse and validate a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate the config's synthetic dataset and write it as TSV files.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute significance and ranking reports from a finished run
    /// directory (reads per_user.csv and manifest.json).
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            cfg.validate()?;
            let run = run_experiment(&cfg)?;
            let mut emitted = emit_reports(&cfg, &run, &cfg.output_dir)?;
            // File datasets get the external-id ↔ dense-index map alongside
            // the reports; synthetic registries are positional already.
            if let DatasetSource::Files {
                checkins,
                pois,
                social,
                categories,
            } = &cfg.dataset
            {
                let (dataset, _) = ctxrec_core::data::load_dataset(
                    checkins,
                    pois,
                    social,
                    categories.as_deref(),
                )?;
                emitted.push(ctxrec_harness::write_index_map(&dataset, &cfg.output_dir)?);
            }
            for path in &emitted {
                println!("{}", path.display());
            }
            println!(
                "done: {} models × {} seeds in {:.1}s",
                run.model_labels.len(),
                run.seeds.len(),
                run.total_seconds
            );
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let specs = cfg.validate()?;
            println!("ok: {} models, {} seeds", specs.len(), cfg.seeds.len());
            Ok(())
        }
        Command::Synth { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            cfg.validate()?;
            let DatasetSource::Synthetic(synth) = &cfg.dataset else {
                return Err(HarnessError::Config(
                    "`synth` needs a config with a synthetic dataset section".into(),
                ));
            };
            let seed = child_seed(cfg.seeds[0], "synth");
            let dataset = generate_synthetic(synth, seed)?;
            let emitted = write_dataset_tsv(&dataset, &out)?;
            for path in &emitted {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Report { input } => {
            let report = ctxrec_harness::reports::replay_reports(&input)?;
            for path in &report {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}
