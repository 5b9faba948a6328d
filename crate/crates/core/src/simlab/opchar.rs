//! Operating characteristics of the mediation procedure by simulation.

use super::generate::{simulate_competing, simulate_trial};
use super::scenario::{EffectCase, ScenarioConfig};
use super::seeds::derive_seed;
use super::stats::{mean, std_dev};
use super::truth::{true_effects, TrueEffects};
use crate::error::{Error, Result};
use crate::inference::{infer, EffectInference, InferenceMethod, InferenceResult};
use crate::linear::CovarianceKind;
use crate::mediation::AnalysisSpec;
use crate::pseudo::{EstimandKind, PseudoMethod, Scale};
use crate::survival::SurvivalSample;
use rayon::prelude::*;

/// Competing-event hazard used by the default grid.
pub const DEFAULT_LAMBDA_D: f64 = 0.2;
pub const DEFAULT_SAMPLE_SIZES: [usize; 3] = [50, 100, 200];
pub const DEFAULT_TAUS: [f64; 3] = [2.0, 3.0, 4.0];
pub const DEFAULT_SCALES: [Scale; 3] = [Scale::SurvivalProb, Scale::Rmst, Scale::CumulativeIncidence(1)];

/// One scenario evaluated on one scale. Cumulative-incidence cells simulate
/// competing risks; the other scales use the single-event generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub config: ScenarioConfig,
    pub scale: Scale,
}

impl GridCell {
    pub fn simulate(&self, seed: u64) -> Result<SurvivalSample> {
        let config = self.config.with_seed(seed);
        match self.scale {
            Scale::CumulativeIncidence(_) => simulate_competing(&config),
            _ => simulate_trial(&config),
        }
    }

    pub fn estimand(&self) -> Result<EstimandKind> {
        EstimandKind::new(self.scale, self.config.tau)
    }
}

/// The full factorial grid: effect cases x scales x horizons x sizes.
pub fn default_grid() -> Vec<GridCell> {
    grid(&EffectCase::ALL, &DEFAULT_SCALES, &DEFAULT_TAUS, &DEFAULT_SAMPLE_SIZES, DEFAULT_LAMBDA_D)
}

pub fn grid(cases: &[EffectCase], scales: &[Scale], taus: &[f64], sizes: &[usize], lambda_d: f64) -> Vec<GridCell> {
    let mut cells = Vec::new();
    for &case in cases {
        for &scale in scales {
            for &tau in taus {
                for &n in sizes {
                    let mut config = ScenarioConfig::new(n, case, tau);
                    if matches!(scale, Scale::CumulativeIncidence(_)) {
                        config = config.with_competing(lambda_d);
                    }
                    cells.push(GridCell { config, scale });
                }
            }
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpCharOptions {
    pub replicates: usize,
    pub master_seed: u64,
    pub pseudo_method: PseudoMethod,
    pub inference: InferenceMethod,
    pub covariance: CovarianceKind,
    pub alpha: f64,
}

impl Default for OpCharOptions {
    fn default() -> Self {
        Self {
            replicates: 2000,
            master_seed: 20240101,
            pseudo_method: PseudoMethod::InfluenceFunction,
            inference: InferenceMethod::Delta,
            covariance: CovarianceKind::Classical,
            alpha: 0.05,
        }
    }
}

/// Replicate-level summary of one effect.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectSummary {
    pub truth: f64,
    pub mean_estimate: f64,
    pub bias: f64,
    /// Monte-Carlo standard error of the mean estimate.
    pub mc_se: f64,
    pub sd_estimate: f64,
    pub mean_se: f64,
    pub rejection_rate: f64,
    pub coverage: f64,
    /// True effect is exactly zero, so `rejection_rate` is a type-I error.
    pub is_null: bool,
    pub p_values: Vec<f64>,
}

impl EffectSummary {
    fn from_replicates(truth: f64, draws: &[EffectInference], alpha: f64) -> Self {
        let estimates: Vec<f64> = draws.iter().map(|d| d.estimate).collect();
        let n = draws.len() as f64;
        let mean_estimate = mean(&estimates);
        let sd_estimate = std_dev(&estimates);
        Self {
            truth,
            mean_estimate,
            bias: mean_estimate - truth,
            mc_se: sd_estimate / n.sqrt(),
            sd_estimate,
            mean_se: mean(&draws.iter().map(|d| d.se).collect::<Vec<_>>()),
            rejection_rate: draws.iter().filter(|d| d.rejects(alpha)).count() as f64 / n,
            coverage: draws.iter().filter(|d| d.covers(truth)).count() as f64 / n,
            is_null: truth == 0.0,
            p_values: draws.iter().map(|d| d.p_value).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell_id: usize,
    pub cell: GridCell,
    pub truth: TrueEffects,
    pub completed: usize,
    /// Replicates that produced no estimate (degenerate sample or fit).
    pub failures: usize,
    pub nde: EffectSummary,
    pub nie: EffectSummary,
    pub te: EffectSummary,
}

/// Runs one replicate of a cell.
pub fn run_replicate(cell: &GridCell, options: &OpCharOptions, seed: u64) -> Result<InferenceResult> {
    let sample = cell.simulate(seed)?;
    let spec = AnalysisSpec::new(cell.estimand()?)
        .with_pseudo_method(options.pseudo_method)
        .with_covariance(options.covariance);
    let method = match options.inference {
        InferenceMethod::Bootstrap { reps, stratified, .. } => InferenceMethod::Bootstrap {
            reps,
            seed: derive_seed(seed, u64::MAX, 0),
            stratified,
        },
        other => other,
    };
    infer(&sample, &spec, method, options.alpha)
}

/// Bias, rejection rate and coverage per cell. Replicate `r` of cell `c`
/// uses seed `derive_seed(master_seed, c, r)`, so output does not depend on
/// scheduling. Zero replicates yields an empty table.
pub fn run_operating_characteristics(cells: &[GridCell], options: &OpCharOptions) -> Result<Vec<CellResult>> {
    if options.replicates == 0 {
        return Ok(Vec::new());
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", options.alpha)));
    }
    cells
        .iter()
        .enumerate()
        .map(|(cell_id, cell)| {
            let truth = true_effects(&cell.config, cell.scale)?;
            let outcomes: Vec<Option<InferenceResult>> = (0..options.replicates)
                .into_par_iter()
                .map(|r| {
                    let seed = derive_seed(options.master_seed, cell_id as u64, r as u64);
                    run_replicate(cell, options, seed).ok()
                })
                .collect();
            let ok: Vec<&InferenceResult> = outcomes.iter().flatten().collect();
            let failures = outcomes.len() - ok.len();
            log::info!("cell {}/{}: {} completed, {failures} failed", cell_id + 1, cells.len(), ok.len());
            let pick = |f: fn(&InferenceResult) -> EffectInference| ok.iter().map(|r| f(r)).collect::<Vec<_>>();
            Ok(CellResult {
                cell_id,
                cell: *cell,
                truth,
                completed: ok.len(),
                failures,
                nde: EffectSummary::from_replicates(truth.nde, &pick(|r| r.nde), options.alpha),
                nie: EffectSummary::from_replicates(truth.nie, &pick(|r| r.nie), options.alpha),
                te: EffectSummary::from_replicates(truth.te, &pick(|r| r.te), options.alpha),
            })
        })
        .collect()
}
