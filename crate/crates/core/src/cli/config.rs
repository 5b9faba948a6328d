//! TOML configuration files. Unknown keys are rejected.

use super::{CliError, CliResult};
use crate::inference::InferenceMethod;
use crate::linear::CovarianceKind;
use crate::pseudo::{PseudoMethod, Scale};
use crate::simlab::opchar::{grid, GridCell, OpCharOptions, DEFAULT_LAMBDA_D};
use crate::simlab::{EffectCase, ScenarioConfig};
use serde::Deserialize;
use std::path::Path;

/// A scenario file is a [`ScenarioConfig`] in TOML:
///
/// ```toml
/// n_per_arm = 100
/// direct_effect = true
/// indirect_effect = true
/// tau = 2.0
/// seed = 42
/// # optional: k = 3.0, mu0 = 0.0, mu1 = -1.0, pi_c = 0.2
/// [competing]
/// lambda_d = 0.2
/// ```
pub type ScenarioFile = ScenarioConfig;

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

pub fn parse_scenario(text: &str) -> CliResult<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_scenario(path: &Path) -> CliResult<ScenarioConfig> {
    parse_scenario(&read_text(path)?)
}

/// Operating-characteristics grid. Every key is optional; the defaults
/// reproduce the full 108-cell design with delta-method inference.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridFile {
    pub replicates: usize,
    pub seed: u64,
    pub alpha: f64,
    /// `if` or `jackknife`.
    pub pseudo: String,
    /// `delta`, `sobel` or `boot`.
    pub inference: String,
    pub boot_reps: usize,
    pub stratified_boot: bool,
    pub robust_se: bool,
    pub cases: Vec<EffectCase>,
    /// `surv`, `rmst`, `cif:<cause>`.
    pub scales: Vec<String>,
    pub taus: Vec<f64>,
    pub n_per_arm: Vec<usize>,
    pub k: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub pi_c: f64,
    pub lambda_d: f64,
}

impl Default for GridFile {
    fn default() -> Self {
        Self {
            replicates: 2000,
            seed: 1,
            alpha: 0.05,
            pseudo: "if".into(),
            inference: "delta".into(),
            boot_reps: 200,
            stratified_boot: false,
            robust_se: false,
            cases: EffectCase::ALL.to_vec(),
            scales: vec!["surv".into(), "rmst".into(), "cif:1".into()],
            taus: vec![2.0, 3.0, 4.0],
            n_per_arm: vec![50, 100, 200],
            k: 3.0,
            mu0: 0.0,
            mu1: -1.0,
            pi_c: 0.2,
            lambda_d: DEFAULT_LAMBDA_D,
        }
    }
}

impl GridFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn cells(&self) -> CliResult<Vec<GridCell>> {
        let scales = self
            .scales
            .iter()
            .map(|s| s.parse::<Scale>().map_err(|e| CliError::Config(e.to_string())))
            .collect::<CliResult<Vec<_>>>()?;
        let mut cells = grid(&self.cases, &scales, &self.taus, &self.n_per_arm, self.lambda_d);
        for cell in &mut cells {
            cell.config.k = self.k;
            cell.config.mu0 = self.mu0;
            cell.config.mu1 = self.mu1;
            cell.config.pi_c = self.pi_c;
            cell.config.validate()?;
        }
        Ok(cells)
    }

    pub fn options(&self) -> CliResult<OpCharOptions> {
        let pseudo_method: PseudoMethod = self.pseudo.parse().map_err(|e: crate::Error| CliError::Config(e.to_string()))?;
        let inference = match self.inference.as_str() {
            "delta" => InferenceMethod::Delta,
            "sobel" => InferenceMethod::Sobel,
            "boot" => InferenceMethod::Bootstrap {
                reps: self.boot_reps,
                seed: self.seed,
                stratified: self.stratified_boot,
            },
            other => {
                return Err(CliError::Config(format!(
                    "unknown inference method '{other}', expected delta, sobel or boot"
                )))
            }
        };
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(OpCharOptions {
            replicates: self.replicates,
            master_seed: self.seed,
            pseudo_method,
            inference,
            covariance: if self.robust_se { CovarianceKind::Hc1 } else { CovarianceKind::Classical },
            alpha: self.alpha,
        })
    }
}
