//! Serialization of scenario results: CSV per curve or one JSON document, plus a manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use twinbeam::oracle::mc::GENERATOR;

use crate::scenario::{Curve, ScenarioResult};
use crate::settings::Settings;
use crate::validate::SuiteResult;
use crate::{CliError, Format};

pub const CSV_HEADER: &str = "grid_2kL,value,curve,regime";

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub scenario: &'a str,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub generator: &'static str,
    pub format: Format,
    pub settings: &'a Settings,
    pub files: Vec<String>,
    pub warnings: &'a [String],
    pub suites: &'a [SuiteResult],
}

/// 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn curve_csv(c: &Curve) -> String {
    let mut out = String::with_capacity(64 * (c.grid.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for ((x, v), regime) in c.grid.iter().zip(&c.values).zip(&c.regime) {
        let _ = writeln!(out, "{},{},{},{}", float(*x), float(*v), field(&c.label), field(regime));
    }
    out
}

pub fn suites_csv(suites: &[SuiteResult]) -> String {
    let mut out = String::from("suite,status,metric,threshold,detail\n");
    for s in suites {
        let status = serde_json::to_value(s.status).expect("status serializes");
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.name,
            status.as_str().unwrap_or_default(),
            float(s.metric),
            float(s.threshold),
            field(&s.detail)
        );
    }
    out
}

/// Writes every file sequentially, in curve order; returns the file names.
pub fn write(result: &ScenarioResult, settings: &Settings, out_dir: &Path, format: Format) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), CliError> {
        fs::write(out_dir.join(&name), body)?;
        files.push(name);
        Ok(())
    };
    match format {
        Format::Csv => {
            for c in &result.curves {
                put(format!("{}.csv", c.file), curve_csv(c))?;
            }
            if !result.suites.is_empty() {
                put("validate_report.csv".into(), suites_csv(&result.suites))?;
            }
        }
        Format::Json => {
            let body = serde_json::to_string_pretty(result).map_err(|e| CliError::Usage(e.to_string()))?;
            put(format!("{}.json", result.scenario), body + "\n")?;
        }
    }
    let manifest = Manifest {
        scenario: &result.scenario,
        tool: env!("CARGO_PKG_NAME"),
        tool_version: env!("CARGO_PKG_VERSION"),
        generator: GENERATOR,
        format,
        settings,
        files: files.clone(),
        warnings: &result.warnings,
        suites: &result.suites,
    };
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Usage(e.to_string()))?;
    let name = format!("{}_manifest.json", result.scenario);
    fs::write(out_dir.join(&name), body + "\n")?;
    files.push(name);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, std::f64::consts::TAU, 1e-300, -2.5e17] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn csv_layout() {
        let c = Curve {
            file: "x".into(),
            label: "alpha=2;gamma/kappa=0.2".into(),
            observable: "qfi".into(),
            grid: vec![0.5],
            values: vec![0.25],
            regime: vec!["unbroken".into()],
        };
        assert_eq!(
            curve_csv(&c),
            "grid_2kL,value,curve,regime\n5.0000000000000000e-1,2.5000000000000000e-1,alpha=2;gamma/kappa=0.2,unbroken\n"
        );
        assert_eq!(field("a,b"), "\"a,b\"");
    }
}
