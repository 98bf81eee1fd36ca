//! Experiment configuration file.
//!
//! The file is TOML with one table per section. Every key is optional and
//! unknown keys are rejected with their line and column. See `CONFIG.md` in
//! this crate for the full grammar.

use std::path::{Path, PathBuf};

use cavity_exciton::classical::ClassicalParams;
use cavity_exciton::dynamics::{Method, TimeGrid};
use cavity_exciton::ensemble::{SweepConfig, SweepMode, DEFAULT_SAMPLES};
use cavity_exciton::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub sweep: SweepSection,
    pub time: TimeSection,
    pub dynamics: DynamicsSection,
    pub classical: Option<ClassicalSection>,
    pub output: OutputSection,
    /// Columns written by `dynamics`, `stats` and `cases`. Empty means all.
    pub observables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Disorder widths as fractions of ω_m.
    pub w_grid: Vec<f64>,
    /// Couplings in eV.
    pub g_grid: Vec<f64>,
    pub samples: usize,
    pub master_seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            w_grid: vec![0.0, 0.05, 0.1, 0.15, 0.2],
            g_grid: vec![0.0, 0.4],
            samples: DEFAULT_SAMPLES,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub spacing: Spacing,
    /// First nonzero time of a log grid, ps.
    pub t_min: f64,
    pub t_max: f64,
    /// Points after t = 0.
    pub points: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            spacing: Spacing::Log,
            t_min: 1e-3,
            t_max: 10.0,
            points: 200,
        }
    }
}

impl TimeSection {
    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        let g = match self.spacing {
            Spacing::Log => TimeGrid::log_spaced(self.t_min, self.t_max, self.points),
            Spacing::Uniform => TimeGrid::uniform(self.t_max, self.points),
        };
        g.map_err(|e| CliError::Config(format!("[time]: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    /// Fixed propagation method; unset means the stepped exponential.
    /// Spectral falls back to stepped when its eigenbasis is ill-conditioned.
    pub method: Option<Method>,
    /// Terminal-site population threshold for critical times.
    pub p_cri: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSection {
    /// Use one of the built-in panels (0, 1, 2); explicit keys override it.
    pub panel: Option<usize>,
    pub k_ee: Option<f64>,
    pub k_pe: Option<f64>,
    pub sigma_ee: Option<f64>,
    pub sigma_pe: Option<f64>,
    #[serde(default = "yes")]
    pub include_decay: bool,
    #[serde(default = "yes")]
    pub include_cavity_loss: bool,
}

fn yes() -> bool {
    true
}

impl ClassicalSection {
    pub fn params(&self, model: &ModelParams) -> Result<ClassicalParams, CliError> {
        let panel = self.panel.unwrap_or(0);
        if panel >= ClassicalParams::PANELS.len() {
            return Err(CliError::Config(format!("[classical] panel {panel} does not exist")));
        }
        let mut cp = ClassicalParams::panel(panel, model.clone());
        cp.k_ee = self.k_ee.unwrap_or(cp.k_ee);
        cp.k_pe = self.k_pe.unwrap_or(cp.k_pe);
        cp.sigma_ee = self.sigma_ee.unwrap_or(cp.sigma_ee);
        cp.sigma_pe = self.sigma_pe.unwrap_or(cp.sigma_pe);
        cp.include_decay = self.include_decay;
        cp.include_cavity_loss = self.include_cavity_loss;
        cp.validate().map_err(|e| CliError::Config(format!("[classical]: {e}")))?;
        Ok(cp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model
            .validate()
            .map_err(|e| CliError::Config(format!("[model]: {e}")))?;
        self.sweep_config(SweepMode::SteadyState)?
            .validate()
            .map_err(|e| CliError::Config(format!("[sweep]: {e}")))?;
        self.time.grid()?;
        if let Some(c) = &self.classical {
            c.params(&self.model)?;
        }
        for name in &self.observables {
            if !crate::output::OBSERVABLE_NAMES.contains(&name.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown observable '{name}', expected one of {:?}",
                    crate::output::OBSERVABLE_NAMES
                )));
            }
        }
        if let Some(p) = self.dynamics.p_cri {
            if !(p > 0.0 && p < 1.0) {
                return Err(CliError::Config(format!("[dynamics] p_cri must lie in (0, 1), got {p}")));
            }
        }
        Ok(())
    }

    pub fn sweep_config(&self, mode: SweepMode) -> Result<SweepConfig, CliError> {
        let s = &self.sweep;
        Ok(SweepConfig {
            w_grid: s.w_grid.clone(),
            g_grid: s.g_grid.clone(),
            samples: s.samples,
            master_seed: s.master_seed,
            mode,
            grid: match mode {
                SweepMode::SteadyState => None,
                SweepMode::Trajectory => Some(self.time.grid()?),
            },
            p_cri: self.dynamics.p_cri,
            method: self.dynamics.method,
        })
    }
}
