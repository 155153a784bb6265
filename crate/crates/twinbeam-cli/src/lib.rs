//! Scenario runner for the twinbeam engine: figure curves, scans and validation,
//! written as diff-stable CSV or JSON with a reproducibility manifest.

pub mod output;
pub mod scenario;
pub mod settings;
pub mod validate;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

pub use scenario::{compute, Curve, ScenarioResult, SCENARIOS};
pub use settings::{LengthGrid, Overrides, Settings};

/// Default output directory when `--out` is absent.
pub const OUT_ENV: &str = "TWINBEAM_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("validation failed: {}", .0.join(", "))]
    Validation(Vec<String>),
    #[error("numerical error: {0}")]
    Numeric(#[from] twinbeam::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Usage(format!("format {s:?} is not csv or json"))),
        }
    }
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("twinbeam-out"), PathBuf::from)
}

/// Computes `name`, writes its files into `out_dir`, and fails with
/// [`CliError::Validation`] after writing if any validation suite failed.
pub fn run_scenario(name: &str, overrides: &Overrides, out_dir: &Path, format: Format) -> Result<(ScenarioResult, Vec<String>), CliError> {
    let settings = overrides.resolve()?;
    let result = compute(name, &settings)?;
    let files = output::write(&result, &settings, out_dir, format)?;
    let failed = result.failed_suites();
    if !failed.is_empty() {
        return Err(CliError::Validation(failed.into_iter().map(String::from).collect()));
    }
    Ok((result, files))
}
