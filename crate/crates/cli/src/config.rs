//! TOML experiment configuration.
//!
//! Every key is optional; missing keys take the defaults below and unknown
//! keys are rejected. `papr config` prints the resolved configuration.

use std::path::{Path, PathBuf};

use papr_core::{IcfParams, OfdmConfig, SolverParams, SspaParams};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Monte-Carlo symbols per method and modulation.
    pub n_symbols: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses one per available core.
    pub workers: usize,
    pub ebn0_grid_db: Vec<f64>,
    pub ccdf_thresholds_db: Vec<f64>,
    pub ofdm: OfdmConfig,
    pub solver: SolverParams,
    pub icf: IcfParams,
    pub sspa: SspaParams,
    pub convergence: ConvergenceConfig,
    pub scaling: ScalingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Iterations per residual trace (no early stop).
    pub iterations: usize,
    /// Symbols averaged per curve; defaults to `n_symbols`.
    pub symbols: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    /// Time-domain lengths `l*N`; each must be a power of two divisible by `ofdm.oversampling`.
    pub lengths: Vec<usize>,
    /// Timed repetitions per point; the median is reported.
    pub repetitions: usize,
    /// Samples processed per repetition; sets the iteration count `max(4, samples / (l*N))`.
    pub samples_per_repetition: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_symbols: 5000,
            master_seed: 20240601,
            output_dir: PathBuf::from("results"),
            workers: 0,
            ebn0_grid_db: (0..=6).map(|i| 2.0 * i as f64).collect(),
            ccdf_thresholds_db: (0..=130).map(|i| i as f64 / 10.0).collect(),
            ofdm: OfdmConfig::default(),
            solver: SolverParams::default(),
            icf: IcfParams::default(),
            sspa: SspaParams::default(),
            convergence: ConvergenceConfig::default(),
            scaling: ScalingConfig::default(),
        }
    }
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            symbols: None,
        }
    }
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            lengths: vec![512, 1024, 2048, 4096, 8192],
            repetitions: 101,
            samples_per_repetition: 1 << 17,
        }
    }
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> HarnessError {
    HarnessError::ConfigInvalid {
        field: field.into(),
        reason: reason.into(),
    }
}

fn scoped(section: &str, err: papr_core::Error) -> HarnessError {
    match err {
        papr_core::Error::InvalidParameter { name, reason } => {
            invalid(format!("{section}.{name}"), reason)
        }
        other => invalid(section, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_symbols == 0 {
            return Err(invalid("n_symbols", "must be at least 1"));
        }
        self.ofdm.validate().map_err(|e| scoped("ofdm", e))?;
        if !self.ofdm.time_len().is_power_of_two() {
            return Err(invalid(
                "ofdm",
                format!(
                    "n_subcarriers * oversampling = {} must be a power of two",
                    self.ofdm.time_len()
                ),
            ));
        }
        self.solver.validate().map_err(|e| scoped("solver", e))?;
        self.icf.validate().map_err(|e| scoped("icf", e))?;
        self.sspa.validate().map_err(|e| scoped("sspa", e))?;
        if let Some(v) = self
            .ebn0_grid_db
            .iter()
            .find(|v| v.is_nan() || **v == f64::NEG_INFINITY)
        {
            return Err(invalid(
                "ebn0_grid_db",
                format!("{v} is not a usable Eb/N0"),
            ));
        }
        if self.ccdf_thresholds_db.is_empty() {
            return Err(invalid("ccdf_thresholds_db", "must not be empty"));
        }
        if self.ccdf_thresholds_db.iter().any(|v| !v.is_finite()) {
            return Err(invalid("ccdf_thresholds_db", "thresholds must be finite"));
        }
        if self.convergence.iterations == 0 {
            return Err(invalid("convergence.iterations", "must be at least 1"));
        }
        if self.convergence.symbols == Some(0) {
            return Err(invalid("convergence.symbols", "must be at least 1"));
        }
        if self.scaling.repetitions == 0 {
            return Err(invalid("scaling.repetitions", "must be at least 1"));
        }
        for &len in &self.scaling.lengths {
            if !len.is_power_of_two()
                || len % self.ofdm.oversampling != 0
                || len / self.ofdm.oversampling < 2
            {
                return Err(invalid(
                    "scaling.lengths",
                    format!("{len} must be a power of two with at least 2 subcarriers at the configured oversampling"),
                ));
            }
        }
        Ok(())
    }

    pub fn convergence_symbols(&self) -> usize {
        self.convergence.symbols.unwrap_or(self.n_symbols)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// Parses and validates a config document. `origin` names it in error messages.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::ConfigSyntax {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::ConfigMissing {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path)
}
