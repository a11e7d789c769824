//! Experiment runner for the `mech-eff` command-line tool.
//!
//! Each named experiment evaluates one family of claims about reserve-price
//! auctions, writes a per-`k` CSV table and a JSON summary, and reports
//! whether every checked inequality held.

// Negated comparisons are how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod format;

use std::fs;

pub use config::{Experiment, ExperimentConfig, KSpec, MSpec, PartialConfig};
pub use experiments::{run_experiment, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] mech_eff_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Environment variable capping the simulation worker count.
pub const THREADS_ENV: &str = "MECH_EFF_THREADS";

/// Reads the worker cap from [`THREADS_ENV`]; unset or empty means no cap.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Writes the CSV and the JSON summary next to it.
pub fn write_report(config: &ExperimentConfig, report: &Report) -> Result<(), CliError> {
    let io = |path: &std::path::Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    if let Some(dir) = config.output_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(&config.output_path, report.to_csv()).map_err(io(&config.output_path))?;
    let summary_path = config.summary_path();
    let mut summary = serde_json::to_string_pretty(&report.summary(config)).expect("summary is valid JSON");
    summary.push('\n');
    fs::write(&summary_path, summary).map_err(io(&summary_path))?;
    Ok(())
}
