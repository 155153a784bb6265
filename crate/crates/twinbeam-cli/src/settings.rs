//! Run settings: a flat TOML file overlaid by command-line flags.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use twinbeam::oracle::McConfig;

use crate::CliError;

/// Open-left grid `start + (stop − start)·k/count`, `k = 1..=count`, in `2κL`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LengthGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for LengthGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 8.0,
            count: 400,
        }
    }
}

impl LengthGrid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / self.count as f64;
        (1..=self.count).map(|k| self.start + step * k as f64).collect()
    }
}

impl FromStr for LengthGrid {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("length grid {s:?} is not start:stop:count"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let grid = LengthGrid {
            start: a.trim().parse().map_err(|_| bad())?,
            stop: b.trim().parse().map_err(|_| bad())?,
            count: n.trim().parse().map_err(|_| bad())?,
        };
        if !(grid.start >= 0.0 && grid.stop > grid.start && grid.stop.is_finite() && grid.count >= 2) {
            return Err(CliError::Usage(format!("length grid {s:?} needs 0 ≤ start < stop and count ≥ 2")));
        }
        Ok(grid)
    }
}

/// Optional values; field names mirror `SystemParams` and `McConfig`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub g: Option<f64>,
    pub length_grid: Option<String>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub n_traj: Option<u64>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: Overrides) -> Overrides {
        Overrides {
            gamma: top.gamma.or(self.gamma),
            kappa: top.kappa.or(self.kappa),
            g: top.g.or(self.g),
            length_grid: top.length_grid.or(self.length_grid),
            alpha: top.alpha.or(self.alpha),
            seed: top.seed.or(self.seed),
            n_traj: top.n_traj.or(self.n_traj),
            threads: top.threads.or(self.threads),
        }
    }

    pub fn resolve(&self) -> Result<Settings, CliError> {
        let mc = McConfig::default();
        let s = Settings {
            gamma: self.gamma,
            kappa: self.kappa.unwrap_or(1.0),
            g: self.g,
            grid: self.length_grid.as_deref().map(str::parse).transpose()?.unwrap_or_default(),
            alpha: self.alpha.unwrap_or(2.0),
            mc: McConfig {
                seed: self.seed.unwrap_or(mc.seed),
                n_traj: self.n_traj.unwrap_or(mc.n_traj),
                ..mc
            },
            threads: self.threads,
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} = {v} must be positive and finite")))
            }
        };
        positive("kappa", s.kappa)?;
        if let Some(g) = s.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(CliError::Usage(format!("gamma = {g} must be non-negative and finite")));
            }
        }
        if !(s.alpha >= 0.0 && s.alpha.is_finite()) {
            return Err(CliError::Usage(format!("alpha = {} must be non-negative and finite", s.alpha)));
        }
        if s.threads == Some(0) {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        s.mc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    /// Replaces each scenario's built-in `γ` set when present.
    pub gamma: Option<f64>,
    pub kappa: f64,
    /// Defaults to `γ` of each curve.
    pub g: Option<f64>,
    pub grid: LengthGrid,
    pub alpha: f64,
    pub mc: McConfig,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Overrides::default().resolve().expect("defaults are valid")
    }
}
