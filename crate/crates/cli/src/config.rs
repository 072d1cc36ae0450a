//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # one setting per line; lists are comma separated
//! m = 3
//! n = 4
//! users = 1
//! k-levels = 1,2,4
//! y = 12
//! snr-db = 15,20,25,30
//! ```
//!
//! Keys match the long command-line flags. Omitted keys keep their defaults.

use std::fmt::Write as _;
use std::str::FromStr;

use macdmt::{FeedbackExponent, MultiplexPoint, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Config(format!("unknown format {other:?}"))),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub users: usize,
    /// One tradeoff series per entry; `simulate` needs exactly one.
    pub k_levels: Vec<usize>,
    /// `None` means `y = mn`.
    pub y: Option<FeedbackExponent>,
    /// `None` means all zeros.
    pub r: Option<Vec<f64>>,
    /// 1-based swept user for `tradeoff`.
    pub sweep: Option<usize>,
    pub resolution: usize,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub cal_trials: u64,
    pub seed: u64,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 1,
            n: 1,
            users: 1,
            k_levels: vec![1],
            y: None,
            r: None,
            sweep: None,
            resolution: 300,
            snr_db: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 1_000_000,
            cal_trials: 1_000_000,
            seed: 0,
            out: None,
            format: None,
        }
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::Config(format!("bad value {s:?} for {key}")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| CliError::Config(format!("bad value {value:?} for {key}")))
}

impl ExperimentConfig {
    pub fn feedback_exponent(&self) -> FeedbackExponent {
        self.y
            .unwrap_or(FeedbackExponent::Finite((self.m * self.n) as f64))
    }

    /// System configuration for one feedback cardinality.
    pub fn system(&self, levels: usize) -> Result<SystemConfig> {
        Ok(SystemConfig::new(
            self.m,
            self.n,
            self.users,
            levels,
            self.feedback_exponent(),
        )?)
    }

    pub fn gains(&self) -> Result<MultiplexPoint> {
        let gains = self.r.clone().unwrap_or_else(|| vec![0.0; self.users]);
        if gains.len() != self.users {
            return Err(CliError::Config(format!(
                "--r has {} entries for {} users",
                gains.len(),
                self.users
            )));
        }
        Ok(MultiplexPoint::new(gains)?)
    }

    pub fn single_level(&self) -> Result<usize> {
        match self.k_levels.as_slice() {
            [k] => Ok(*k),
            other => Err(CliError::Config(format!(
                "simulate needs exactly one K value, got {other:?}"
            ))),
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "m" => self.m = parse_one(&key, value)?,
            "n" => self.n = parse_one(&key, value)?,
            "users" => self.users = parse_one(&key, value)?,
            "k-levels" => self.k_levels = parse_list(&key, value)?,
            "y" => self.y = Some(parse_one(&key, value)?),
            "r" => self.r = Some(parse_list(&key, value)?),
            "sweep" => self.sweep = Some(parse_one(&key, value)?),
            "resolution" => self.resolution = parse_one(&key, value)?,
            "snr-db" => self.snr_db = parse_list(&key, value)?,
            "trials" => self.trials = parse_one(&key, value)?,
            "cal-trials" => self.cal_trials = parse_one(&key, value)?,
            "seed" => self.seed = parse_one(&key, value)?,
            "out" => self.out = Some(value.trim().to_string()),
            "format" => self.format = Some(parse_one(&key, value)?),
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses the key-value format on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "users = {}", self.users);
        let _ = writeln!(s, "k-levels = {}", join(&self.k_levels));
        if let Some(y) = self.y {
            let _ = writeln!(s, "y = {y}");
        }
        if let Some(r) = &self.r {
            let _ = writeln!(s, "r = {}", join(r));
        }
        if let Some(sweep) = self.sweep {
            let _ = writeln!(s, "sweep = {sweep}");
        }
        let _ = writeln!(s, "resolution = {}", self.resolution);
        let _ = writeln!(s, "snr-db = {}", join(&self.snr_db));
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "cal-trials = {}", self.cal_trials);
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {out}");
        }
        if let Some(format) = self.format {
            let _ = writeln!(s, "format = {format}");
        }
        s
    }
}
