//! Command-line front end for the tradeoff engine and outage simulator.

pub mod commands;
pub mod config;
pub mod error;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_simulate, cmd_tradeoff, verify_report, Outputs, ResultRecord, VerifyReport,
};
pub use config::{ExperimentConfig, OutputFormat};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "macdmt",
    version,
    about = "Diversity-multiplexing tradeoff with noisy quantized feedback"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit achievable tradeoff curves, one series per K.
    Tradeoff(ExperimentArgs),
    /// Monte Carlo outage sweep with calibrated feedback power control.
    Simulate(ExperimentArgs),
    /// Check the closed-form identities and grid properties.
    Verify(ExperimentArgs),
}

/// Every flag overrides the matching key of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// Key-value configuration file.
    #[arg(long)]
    pub config: Option<String>,
    /// Transmit antennas per user.
    #[arg(long)]
    pub m: Option<String>,
    /// Receive antennas.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub users: Option<String>,
    /// Feedback cardinalities, comma separated.
    #[arg(long = "k-levels")]
    pub k_levels: Option<String>,
    /// Feedback error exponent, a number or `inf` (default: m*n).
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    /// Multiplexing gains, comma separated, one per user.
    #[arg(long)]
    pub r: Option<String>,
    /// 1-based user whose gain is swept by `tradeoff`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Samples per tradeoff curve.
    #[arg(long)]
    pub resolution: Option<String>,
    /// SNR grid in dB, comma separated.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Trials per SNR point.
    #[arg(long)]
    pub trials: Option<String>,
    /// Trials per calibration stage.
    #[arg(long = "cal-trials")]
    pub cal_trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output path (stem when --format is omitted).
    #[arg(long)]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
}

impl ExperimentArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut exp = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            exp.merge_text(&text)?;
        }
        let flags = [
            ("m", &self.m),
            ("n", &self.n),
            ("users", &self.users),
            ("k-levels", &self.k_levels),
            ("y", &self.y),
            ("r", &self.r),
            ("sweep", &self.sweep),
            ("resolution", &self.resolution),
            ("snr-db", &self.snr_db),
            ("trials", &self.trials),
            ("cal-trials", &self.cal_trials),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                exp.set(key, v)?;
            }
        }
        Ok(exp)
    }
}

/// Runs one command and maps the outcome to an exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Tradeoff(args) => {
            let exp = args.resolve()?;
            let outputs = cmd_tradeoff(&exp)?;
            report_paths(commands::write_outputs(&exp, &outputs)?);
            Ok(())
        }
        Command::Simulate(args) => {
            let exp = args.resolve()?;
            let outputs = cmd_simulate(&exp)?;
            report_paths(commands::write_outputs(&exp, &outputs)?);
            if outputs.record.flagged {
                let reason = outputs
                    .record
                    .simulated
                    .as_ref()
                    .and_then(|run| run.slope_error.clone())
                    .unwrap_or_else(|| "some SNR points have too few outage events".into());
                return Err(CliError::Unreliable(reason));
            }
            Ok(())
        }
        Command::Verify(args) => {
            let exp = args.resolve()?;
            let report = verify_report()?;
            print!("{}", commands::render_report(&report));
            if let Some(out) = &exp.out {
                let json = serde_json::to_string_pretty(&report)?;
                std::fs::write(out, json).map_err(|source| CliError::Io {
                    path: out.clone(),
                    source,
                })?;
            }
            match commands::first_failure(&report) {
                Some(what) => Err(CliError::VerificationFailed(what)),
                None => Ok(()),
            }
        }
    }
}

fn report_paths(paths: Vec<std::path::PathBuf>) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}
