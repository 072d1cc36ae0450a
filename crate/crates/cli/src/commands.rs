//! The `tradeoff`, `simulate` and `verify` subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use macdmt::analytic::{
    c_recursion, cbar_recursion, check_power_gap, d_opt_with_branch, feasible_points,
    piecewise_discrepancy, sample_curve, verify_closed_forms, Branch, CheckStatus, DmtCurve,
    IdentityCheck, SweepAxis,
};
use macdmt::sim::{fit_diversity_slope, run_outage, siso_reference_outage, OutageRun, SimSettings};
use macdmt::{FeedbackExponent, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column order of the tradeoff CSV.
pub const TRADEOFF_COLUMNS: [&str; 4] = ["r", "d", "K", "branch"];

/// Column order of the simulation CSV.
pub const SIMULATION_COLUMNS: [&str; 13] = [
    "snr_db",
    "trials",
    "outages",
    "probability",
    "std_error",
    "ci_low",
    "ci_high",
    "reliable",
    "epsilon",
    "decomposition_bound",
    "reference",
    "schedule_flagged",
    "power_levels",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analytic {
    Curves {
        curves: Vec<DmtCurve>,
    },
    Exponents {
        d_opt: f64,
        branch: Branch,
        /// `C_1 .. C_K`.
        c: Vec<f64>,
        /// `Cbar_1 .. Cbar_K`.
        cbar: Vec<f64>,
        /// Exact outage per SNR point (scalar single-user links only).
        reference_outage: Option<Vec<f64>>,
        reference_slope: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub experiment: ExperimentConfig,
    pub analytic: Analytic,
    pub simulated: Option<OutageRun>,
    pub flagged: bool,
}

impl ResultRecord {
    fn new(
        experiment: &ExperimentConfig,
        analytic: Analytic,
        simulated: Option<OutageRun>,
    ) -> Self {
        let flagged = simulated.as_ref().is_some_and(OutageRun::flagged);
        ResultRecord {
            tool_version: TOOL_VERSION.to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            experiment: experiment.clone(),
            analytic,
            simulated,
            flagged,
        }
    }
}

/// Serialized outputs of one command.
#[derive(Debug, Clone)]
pub struct Outputs {
    pub record: ResultRecord,
    pub csv: String,
    pub json: String,
}

fn sweep_axis(exp: &ExperimentConfig) -> Result<SweepAxis> {
    let user = exp.sweep.unwrap_or(1);
    if user == 0 || user > exp.users {
        return Err(CliError::Config(format!(
            "--sweep must name a user in 1..={}, got {user}",
            exp.users
        )));
    }
    Ok(SweepAxis {
        user: user - 1,
        base: exp.gains()?.gains().to_vec(),
    })
}

/// One curve per requested `K`.
pub fn tradeoff_curves(exp: &ExperimentConfig) -> Result<Vec<DmtCurve>> {
    if exp.k_levels.is_empty() {
        return Err(CliError::Config("no K values requested".into()));
    }
    let axis = sweep_axis(exp)?;
    exp.k_levels
        .iter()
        .map(|&k| Ok(sample_curve(&exp.system(k)?, &axis, exp.resolution)?))
        .collect()
}

pub fn tradeoff_csv(curves: &[DmtCurve]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRADEOFF_COLUMNS)?;
    for curve in curves {
        let k = curve.config.levels.to_string();
        for s in &curve.samples {
            w.write_record([
                s.r.to_string(),
                s.d.to_string(),
                k.clone(),
                s.branch.label().to_string(),
            ])?;
        }
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: "<memory>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn cmd_tradeoff(exp: &ExperimentConfig) -> Result<Outputs> {
    let curves = tradeoff_curves(exp)?;
    let csv = tradeoff_csv(&curves)?;
    let record = ResultRecord::new(exp, Analytic::Curves { curves }, None);
    let json = serde_json::to_string_pretty(&record)?;
    Ok(Outputs { record, csv, json })
}

fn is_scalar_link(cfg: &SystemConfig) -> bool {
    cfg.m == 1 && cfg.n == 1 && cfg.users == 1
}

pub fn simulation_csv(run: &OutageRun, reference: Option<&[f64]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SIMULATION_COLUMNS)?;
    for (j, (e, s)) in run.estimates.iter().zip(&run.schedules).enumerate() {
        let levels = s
            .levels
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        let reference = reference.map(|r| r[j].to_string()).unwrap_or_default();
        w.write_record([
            e.snr_db.to_string(),
            e.trials.to_string(),
            e.outages.to_string(),
            e.probability.to_string(),
            e.std_error.to_string(),
            e.ci_low.to_string(),
            e.ci_high.to_string(),
            e.reliable.to_string(),
            e.epsilon.to_string(),
            e.decomposition_bound.to_string(),
            reference,
            s.flagged.to_string(),
            levels,
        ])?;
    }
    finish_csv(w)
}

/// Calibrates, estimates and fits; the record carries the analytic target.
/// Returns the outputs even when flagged; the caller decides the exit code.
pub fn cmd_simulate(exp: &ExperimentConfig) -> Result<Outputs> {
    let cfg = exp.system(exp.single_level()?)?;
    let r = exp.gains()?;
    if exp.snr_db.is_empty() {
        return Err(CliError::Config("--snr-db is empty".into()));
    }
    let (d_opt, branch) = d_opt_with_branch(&cfg, &r)?;
    let c = (1..=cfg.levels)
        .map(|j| c_recursion(&cfg, &r, j))
        .collect::<macdmt::Result<Vec<_>>>()?;
    let cbar = (1..=cfg.levels)
        .map(|j| cbar_recursion(&cfg, &r, j))
        .collect::<macdmt::Result<Vec<_>>>()?;

    let (reference_outage, reference_slope) = if is_scalar_link(&cfg) {
        let probs: Vec<f64> = exp
            .snr_db
            .iter()
            .map(|db| siso_reference_outage(cfg.levels, cfg.y, r.gains()[0], 10f64.powf(db / 10.0)))
            .collect();
        let points: Vec<(f64, f64)> = exp
            .snr_db
            .iter()
            .zip(&probs)
            .map(|(db, p)| (10f64.powf(db / 10.0), *p))
            .collect();
        let slope = fit_diversity_slope(&points).ok().map(|f| f.diversity);
        (Some(probs), slope)
    } else {
        (None, None)
    };

    let settings = SimSettings::new(exp.trials, exp.cal_trials, exp.seed);
    let run = run_outage(&cfg, &r, &exp.snr_db, &settings)?;
    let csv = simulation_csv(&run, reference_outage.as_deref())?;
    let analytic = Analytic::Exponents {
        d_opt,
        branch,
        c,
        cbar,
        reference_outage,
        reference_slope,
    };
    let record = ResultRecord::new(exp, analytic, Some(run));
    let json = serde_json::to_string_pretty(&record)?;
    Ok(Outputs { record, csv, json })
}

/// Pass/fail counts for one grid check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub check: String,
    pub m: usize,
    pub n: usize,
    pub users: usize,
    pub points: usize,
    pub failures: usize,
    /// Largest violation (gap check) or discrepancy (three-branch check).
    pub worst: f64,
    pub first_failure: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub identities: Vec<IdentityCheck>,
    pub grids: Vec<GridCheck>,
    pub passed: bool,
}

/// `(m, n, L)` systems used for the grid checks.
pub const GRID_SYSTEMS: [(usize, usize, usize); 4] = [(1, 1, 1), (2, 2, 1), (3, 4, 1), (3, 4, 2)];
pub const GRID_POINTS: usize = 1000;
pub const MAX_VERIFY_LEVELS: usize = 6;

pub fn verify_report() -> Result<VerifyReport> {
    let mut identities = Vec::new();
    for m in 1..=4 {
        for n in 1..=4 {
            for k in 1..=MAX_VERIFY_LEVELS {
                let cfg = SystemConfig::new(m, n, 1, k, FeedbackExponent::Finite((m * n) as f64))?;
                identities.extend(verify_closed_forms(&cfg)?);
            }
        }
    }
    let mut grids = Vec::new();
    for &(m, n, users) in &GRID_SYSTEMS {
        let cfg = SystemConfig::new(m, n, users, 1, FeedbackExponent::Finite((m * n) as f64))?;
        let points = feasible_points(&cfg, GRID_POINTS)?;
        let mut gap = GridCheck {
            check: "D(r,1+mn) >= mn + D(r,1)".into(),
            m,
            n,
            users,
            points: points.len(),
            failures: 0,
            worst: 0.0,
            first_failure: None,
        };
        let mut cut = GridCheck {
            check: format!("three-branch form = d_opt, K=1..{MAX_VERIFY_LEVELS}"),
            ..gap.clone()
        };
        for r in &points {
            let g = check_power_gap(&cfg, r)?;
            gap.worst = gap.worst.max(g.rhs - g.lhs);
            if !g.holds {
                gap.failures += 1;
                gap.first_failure.get_or_insert_with(|| r.gains().to_vec());
            }
            let diff = piecewise_discrepancy(&cfg, r, MAX_VERIFY_LEVELS)?;
            cut.worst = cut.worst.max(diff);
            if diff > macdmt::config::EXPONENT_TOL {
                cut.failures += 1;
                cut.first_failure.get_or_insert_with(|| r.gains().to_vec());
            }
        }
        grids.push(gap);
        grids.push(cut);
    }
    let passed =
        identities.iter().all(IdentityCheck::passed) && grids.iter().all(|g| g.failures == 0);
    Ok(VerifyReport {
        identities,
        grids,
        passed,
    })
}

pub fn render_report(report: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<32} {:>2} {:>2} {:>2} {:>14} {:>14} {:>10}  status",
        "identity", "m", "n", "K", "expected", "computed", "diff"
    );
    for c in &report.identities {
        let status = match c.status {
            CheckStatus::Pass => "pass".to_string(),
            CheckStatus::Fail => "FAIL".to_string(),
            CheckStatus::Skipped => format!("skipped ({})", c.note.as_deref().unwrap_or("")),
        };
        let _ = writeln!(
            s,
            "{:<32} {:>2} {:>2} {:>2} {:>14} {:>14} {:>10.3e}  {status}",
            c.identity, c.m, c.n, c.levels, c.expected, c.computed, c.difference
        );
    }
    let _ = writeln!(s);
    for g in &report.grids {
        let _ = writeln!(
            s,
            "{:<40} (m={}, n={}, L={}): {} points, {} failures, worst {:.3e}  {}",
            g.check,
            g.m,
            g.n,
            g.users,
            g.points,
            g.failures,
            g.worst,
            if g.failures == 0 { "pass" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        s,
        "\n{}",
        if report.passed {
            "all checks passed"
        } else {
            "SOME CHECKS FAILED"
        }
    );
    s
}

/// First failing tuple, for the error message.
pub fn first_failure(report: &VerifyReport) -> Option<String> {
    if let Some(c) = report.identities.iter().find(|c| !c.passed()) {
        return Some(format!(
            "{} at (m={}, n={}, K={}): expected {}, computed {}",
            c.identity, c.m, c.n, c.levels, c.expected, c.computed
        ));
    }
    report.grids.iter().find(|g| g.failures > 0).map(|g| {
        format!(
            "{} at (m={}, n={}, L={}), r = {:?}",
            g.check, g.m, g.n, g.users, g.first_failure
        )
    })
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes outputs per `--out` / `--format`: with both, one file at `out`;
/// with only `out`, `<out>.csv` and `<out>.json`; without `out`, the chosen
/// format (CSV by default) goes to stdout.
pub fn write_outputs(exp: &ExperimentConfig, outputs: &Outputs) -> Result<Vec<PathBuf>> {
    match (&exp.out, exp.format) {
        (Some(out), Some(format)) => {
            let path = PathBuf::from(out);
            write_file(&path, body(outputs, format))?;
            Ok(vec![path])
        }
        (Some(out), None) => {
            let stem = PathBuf::from(out);
            let csv = stem.with_extension("csv");
            let json = stem.with_extension("json");
            write_file(&csv, &outputs.csv)?;
            write_file(&json, &outputs.json)?;
            Ok(vec![csv, json])
        }
        (None, format) => {
            print!("{}", body(outputs, format.unwrap_or(OutputFormat::Csv)));
            Ok(Vec::new())
        }
    }
}

fn body(outputs: &Outputs, format: OutputFormat) -> &str {
    match format {
        OutputFormat::Csv => &outputs.csv,
        OutputFormat::Json => &outputs.json,
    }
}
