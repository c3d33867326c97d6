//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::parse_config_over;
use crate::error::{Error, Result};
use crate::experiment::{
    budget_sweep, crossover_report, fixed_budget_experiment, reference_r, ExperimentConfig,
    ResultRow,
};
use crate::methods::MethodKind;
use crate::oracle::outcome_curve;
use crate::output::{read_results_csv, write_plot, write_results_csv, PlotData};
use crate::rating::k_curve;

pub const SEED_ENV: &str = "PREFARENA_SEED";

/// Seed precedence, highest first: `--seed`, `--override base_seed=...`,
/// the config file, `PREFARENA_SEED`, the built-in default.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "prefarena",
    version,
    about = "Pair sampling and rating under annotation budgets"
)]
pub struct CliCommand {
    #[command(subcommand)]
    pub subcommand: Command,

    /// Flat key = value config file; `default` uses built-in defaults.
    #[arg(long = "config", global = true, value_name = "PATH")]
    pub config_path: Option<PathBuf>,

    /// key=value pairs applied after the config file.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    #[arg(long = "out", global = true, value_name = "DIR", default_value = ".")]
    pub output_dir: PathBuf,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Fixed-budget comparison of all methods: results.csv and results.svg.
    Run,
    /// Budget sweep: sweep.csv and sweep.svg.
    Sweep,
    /// Outcome probabilities against value difference.
    Curves,
    /// Elo rating change against initial rating difference for several K.
    KCurve,
    /// Crossover summary read from sweep.csv in the output directory.
    Report,
}

fn load_config(cmd: &CliCommand) -> Result<ExperimentConfig> {
    let mut base = ExperimentConfig::default();
    if let Ok(v) = std::env::var(SEED_ENV) {
        base.base_seed = v
            .trim()
            .parse()
            .map_err(|_| Error::config_key(SEED_ENV, None, format!("not an integer: `{v}`")))?;
    }
    let mut cfg = parse_config_over(base, cmd.config_path.as_deref(), &cmd.overrides)?;
    if let Some(seed) = cmd.seed {
        cfg.base_seed = seed;
    }
    if let Some(workers) = cmd.workers {
        cfg.workers = workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summary_table(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{:<16} budget {:>6}  M {:>9.1}  r {:.4} [{:.4}, {:.4}]",
            r.method, r.budget_requested, r.m_actual_mean, r.r_mean, r.r_ci_low, r.r_ci_high
        );
    }
    out
}

/// Crossover summary of a sweep against the Swiss InfoGain reference.
pub fn report_text(rows: &[ResultRow]) -> Result<String> {
    let reference_method = MethodKind::SwissInfoGain.name();
    let reference = reference_r(rows, reference_method)?;
    let m_ref = rows
        .iter()
        .find(|r| r.method == reference_method && r.budget_requested == 0)
        .map_or(0.0, |r| r.m_actual_mean);
    let mut out = format!("reference {reference_method}: r = {reference:.4} at M = {m_ref:.1}\n");
    let mut methods: Vec<&str> = rows
        .iter()
        .filter(|r| r.budget_requested > 0)
        .map(|r| r.method.as_str())
        .collect();
    methods.sort_unstable();
    methods.dedup();
    for method in methods {
        match crossover_report(rows, method, reference)? {
            Some(b) => {
                let _ = writeln!(out, "{method}: first exceeds reference at budget {b}");
            }
            None => {
                let _ = writeln!(out, "{method}: never exceeds reference in this sweep");
            }
        }
    }
    Ok(out)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs one command and returns the text to print on success.
pub fn execute(cmd: &CliCommand) -> Result<String> {
    let cfg = load_config(cmd)?;
    let out = &cmd.output_dir;
    match cmd.subcommand {
        Command::Run => {
            prepare_dir(out)?;
            let rows = fixed_budget_experiment(&cfg)?;
            write_results_csv(&rows, &out.join("results.csv"))?;
            write_plot(PlotData::CorrelationBars(&rows), &out.join("results.svg"))?;
            Ok(summary_table(&rows))
        }
        Command::Sweep => {
            prepare_dir(out)?;
            let rows = budget_sweep(&cfg)?;
            write_results_csv(&rows, &out.join("sweep.csv"))?;
            write_plot(PlotData::SweepBands(&rows), &out.join("sweep.svg"))?;
            let mut text = summary_table(&rows);
            if let Ok(report) = report_text(&rows) {
                text.push_str(&report);
            }
            Ok(text)
        }
        Command::Curves => {
            prepare_dir(out)?;
            let deltas: Vec<f64> = (-200..=200).map(|i| f64::from(i) * 10.0).collect();
            let rows = outcome_curve(&deltas, &cfg.oracle);
            write_plot(
                PlotData::OutcomeCurve(&rows),
                &out.join("outcome_curve.svg"),
            )?;
            Ok(format!("wrote {} outcome rows\n", rows.len()))
        }
        Command::KCurve => {
            prepare_dir(out)?;
            let deltas: Vec<f64> = (-80..=80).map(|i| f64::from(i) * 10.0).collect();
            let curve = k_curve(&deltas, &[10.0, 20.0, 32.0, 40.0], &cfg.oracle);
            write_plot(PlotData::KCurve(&curve), &out.join("k_curve.svg"))?;
            Ok(format!("wrote {} k-curve rows\n", curve.rows.len()))
        }
        Command::Report => {
            let rows = read_results_csv(&out.join("sweep.csv"))?;
            report_text(&rows)
        }
    }
}

/// Runs `cmd`, printing output or a one-line diagnostic, and returns the
/// process exit code: 0 ok, 1 configuration, 2 I/O, 3 anything else.
pub fn run_cli(cmd: &CliCommand) -> i32 {
    match execute(cmd) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("prefarena: error: {e}");
            e.exit_code()
        }
    }
}
