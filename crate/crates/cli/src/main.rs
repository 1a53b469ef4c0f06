//! `isacsim`: experiment driver for the multistatic OFDM sensing
//! simulator. Reads a JSON experiment config, runs the requested
//! experiment, and writes CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 configuration error (parse or validation),
//! 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isacsim_core::harness::{
    rmse_csv, run_rmse_sweep, run_single_shot, run_snr_map, snr_map_csv, trace_json, write_text,
    ExperimentConfig,
};
use isacsim_core::linkbudget::SensingMode;
use isacsim_core::SensingError;

#[derive(Parser)]
#[command(
    name = "isacsim",
    about = "Multistatic OFDM integrated sensing simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Monostatic,
    Bistatic,
    Multistatic,
}

impl From<ModeArg> for SensingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Monostatic => SensingMode::Monostatic,
            ModeArg::Bistatic => SensingMode::Bistatic,
            ModeArg::Multistatic => SensingMode::Multistatic,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (JSON). Defaults to the built-in desk-scale
    /// configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Restricts the run to one sensing mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Output path; wins over the config's `output` field.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a config file, reporting the first problem found.
    ValidateConfig {
        /// Experiment config file (JSON).
        #[arg(long)]
        config: PathBuf,
    },
    /// SNR heatmap over the served sub-sensing cell (CSV: x_m,y_m,snr_db).
    SnrMap(RunArgs),
    /// Monte Carlo RMSE sweep (CSV: one row per mode and sweep point).
    Rmse(RunArgs),
    /// One fully traced pipeline pass (JSON).
    SingleShot(RunArgs),
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, SensingError> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                SensingError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            ExperimentConfig::from_json_str(&text)
        }
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig, SensingError> {
        let mut config = load_config(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(mode) = self.mode {
            config.modes = vec![mode.into()];
        }
        config.validate()?;
        Ok(config)
    }

    /// Explicit --out beats the config's output field, which beats the
    /// subcommand's default filename.
    fn out_path(&self, config: &ExperimentConfig, default_name: &str) -> PathBuf {
        self.out
            .clone()
            .or_else(|| config.output.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(default_name))
    }

    /// The mode a single-result subcommand runs in: the --mode flag or the
    /// config's first listed mode.
    fn single_mode(&self, config: &ExperimentConfig) -> SensingMode {
        self.mode.map(SensingMode::from).unwrap_or(config.modes[0])
    }
}

fn run(cli: Cli) -> Result<(), SensingError> {
    match cli.command {
        Command::ValidateConfig { config } => {
            load_config(&Some(config.clone()))?;
            println!("ok: {} is a valid experiment config", config.display());
            Ok(())
        }
        Command::SnrMap(args) => {
            let config = args.resolve()?;
            let mode = args.single_mode(&config);
            let map = run_snr_map(&config, mode)?;
            let path = args.out_path(&config, "snr_map.csv");
            let csv = snr_map_csv(&map);
            write_text(&path, &csv)?;
            println!(
                "wrote {} {} SNR samples to {}",
                csv.lines().count() - 1,
                mode.as_str(),
                path.display()
            );
            Ok(())
        }
        Command::Rmse(args) => {
            let config = args.resolve()?;
            let records = run_rmse_sweep(&config)?;
            let path = args.out_path(&config, "rmse.csv");
            write_text(&path, &rmse_csv(&records))?;
            println!("wrote {} RMSE records to {}", records.len(), path.display());
            Ok(())
        }
        Command::SingleShot(args) => {
            let config = args.resolve()?;
            let mode = args.single_mode(&config);
            let seed = args.seed.unwrap_or(config.seed);
            let trace = run_single_shot(&config, mode, seed)?;
            let path = args.out_path(&config, "single_shot.json");
            write_text(&path, &trace_json(&trace)?)?;
            println!(
                "wrote {} single-shot trace ({} detections) to {}",
                mode.as_str(),
                trace.receivers.iter().map(|r| r.detections.len()).sum::<usize>(),
                path.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // Flag misuse counts as a configuration problem (exit 1); help and
    // version requests exit cleanly.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SensingError::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
