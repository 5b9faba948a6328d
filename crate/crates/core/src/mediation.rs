//! Product-of-coefficients mediation with a pseudo-value outcome model.
//!
//! The mediator model regresses `M` on the treatment `A` (plus optional
//! treatment-mediator confounders); the outcome model regresses pseudo-values
//! on `A`, `M` and mediator-outcome confounders. With linear models and no
//! treatment-mediator interaction, `NDE = beta_A`, `NIE = alpha_A * beta_M`
//! and `TE = NDE + NIE`.

use crate::error::{Error, Result};
use crate::linear::{design_with_intercept, ols_fit, CovarianceKind, LinearFit};
use crate::pseudo::{pseudo_values, EstimandKind, PseudoMethod, PseudoValueSet};
use crate::survival::{RiskTable, SurvivalSample};
use log::warn;
use std::sync::Once;

pub const INTERCEPT: &str = "(Intercept)";
pub const TREATMENT: &str = "A";
pub const MEDIATOR: &str = "M";

static NO_CONFOUNDER_WARNING: Once = Once::new();

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediationEffects {
    pub nde: f64,
    pub nie: f64,
    pub te: f64,
    /// `nie / te`; `None` when `te == 0`.
    pub prop_mediated: Option<f64>,
    pub scale: EstimandKind,
}

fn covariate_columns<'a>(sample: &'a SurvivalSample, names: &[String]) -> Result<Vec<&'a [f64]>> {
    names
        .iter()
        .map(|name| {
            sample
                .covariate_names()
                .iter()
                .position(|c| c == name)
                .map(|i| sample.covariates()[i].as_slice())
                .ok_or_else(|| Error::InvalidArgument(format!("unknown covariate '{name}'")))
        })
        .collect()
}

fn arm_column(sample: &SurvivalSample) -> Vec<f64> {
    sample.arm().iter().map(|&a| f64::from(a)).collect()
}

/// Regresses the mediator on treatment (and `confounders`, if any).
pub fn fit_mediator_model(
    sample: &SurvivalSample,
    confounders: &[String],
    covariance: CovarianceKind,
) -> Result<LinearFit> {
    let arm = arm_column(sample);
    let mut columns: Vec<&[f64]> = vec![&arm];
    columns.extend(covariate_columns(sample, confounders)?);
    let design = design_with_intercept(sample.len(), &columns);
    let mut names = vec![INTERCEPT.to_string(), TREATMENT.to_string()];
    names.extend(confounders.iter().cloned());
    ols_fit(&design, sample.mediator(), names, covariance)
}

/// Regresses pseudo-values on treatment, mediator and `confounders`.
pub fn fit_outcome_model(
    pseudo: &PseudoValueSet,
    sample: &SurvivalSample,
    confounders: &[String],
    covariance: CovarianceKind,
) -> Result<LinearFit> {
    if pseudo.len() != sample.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} pseudo-values for {} subjects",
            pseudo.len(),
            sample.len()
        )));
    }
    if confounders.is_empty() {
        NO_CONFOUNDER_WARNING.call_once(|| {
            warn!("outcome model fitted without mediator-outcome confounders; identification assumes none exist");
        });
    }
    let arm = arm_column(sample);
    let mut columns: Vec<&[f64]> = vec![&arm, sample.mediator()];
    columns.extend(covariate_columns(sample, confounders)?);
    let design = design_with_intercept(sample.len(), &columns);
    let mut names = vec![INTERCEPT.to_string(), TREATMENT.to_string(), MEDIATOR.to_string()];
    names.extend(confounders.iter().cloned());
    ols_fit(&design, &pseudo.values, names, covariance)
}

fn required(fit: &LinearFit, name: &str) -> Result<f64> {
    fit.coef(name)
        .ok_or_else(|| Error::InvalidArgument(format!("fit has no '{name}' coefficient")))
}

/// Combines the two fits into natural direct, indirect and total effects.
pub fn decompose_effects(mediator_fit: &LinearFit, outcome_fit: &LinearFit, scale: EstimandKind) -> Result<MediationEffects> {
    let alpha_a = required(mediator_fit, TREATMENT)?;
    let beta_a = required(outcome_fit, TREATMENT)?;
    let beta_m = required(outcome_fit, MEDIATOR)?;
    Ok(effects_from_coefficients(alpha_a, beta_a, beta_m, scale))
}

pub fn effects_from_coefficients(alpha_a: f64, beta_a: f64, beta_m: f64, scale: EstimandKind) -> MediationEffects {
    let nde = beta_a;
    let nie = alpha_a * beta_m;
    let te = nde + nie;
    MediationEffects {
        nde,
        nie,
        te,
        prop_mediated: (te != 0.0).then(|| nie / te),
        scale,
    }
}

/// What to fit: estimand, pseudo-value generator and model options.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSpec {
    pub estimand: EstimandKind,
    pub pseudo_method: PseudoMethod,
    pub covariance: CovarianceKind,
    pub mediator_confounders: Vec<String>,
    pub outcome_confounders: Vec<String>,
    /// Treatment-mediator interaction; not supported by the linear decomposition.
    pub interaction: bool,
}

impl AnalysisSpec {
    pub fn new(estimand: EstimandKind) -> Self {
        Self {
            estimand,
            pseudo_method: PseudoMethod::InfluenceFunction,
            covariance: CovarianceKind::Classical,
            mediator_confounders: Vec::new(),
            outcome_confounders: Vec::new(),
            interaction: false,
        }
    }

    pub fn with_pseudo_method(mut self, method: PseudoMethod) -> Self {
        self.pseudo_method = method;
        self
    }

    pub fn with_covariance(mut self, covariance: CovarianceKind) -> Self {
        self.covariance = covariance;
        self
    }

    pub fn with_outcome_confounders(mut self, names: Vec<String>) -> Self {
        self.outcome_confounders = names;
        self
    }

    pub fn with_mediator_confounders(mut self, names: Vec<String>) -> Self {
        self.mediator_confounders = names;
        self
    }
}

/// Everything produced by one pass of the mediation procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct MediationFit {
    pub theta_hat: f64,
    pub pseudo: PseudoValueSet,
    pub mediator_fit: LinearFit,
    pub outcome_fit: LinearFit,
    pub effects: MediationEffects,
}

/// Full-sample estimate, pseudo-values, both regressions and the
/// decomposition.
pub fn mediate(sample: &SurvivalSample, spec: &AnalysisSpec) -> Result<MediationFit> {
    if spec.interaction {
        return Err(Error::Unsupported(
            "treatment-mediator interaction is outside the linear no-interaction decomposition".into(),
        ));
    }
    let pseudo = pseudo_values(sample, &spec.estimand, spec.pseudo_method)?;
    let mediator_fit = fit_mediator_model(sample, &spec.mediator_confounders, spec.covariance)?;
    let outcome_fit = fit_outcome_model(&pseudo, sample, &spec.outcome_confounders, spec.covariance)?;
    let effects = decompose_effects(&mediator_fit, &outcome_fit, spec.estimand)?;
    Ok(MediationFit {
        theta_hat: pseudo.theta_hat,
        pseudo,
        mediator_fit,
        outcome_fit,
        effects,
    })
}

/// Model-free total effect: the difference between the arm-specific
/// nonparametric estimates (treated minus control).
pub fn unadjusted_total_effect(sample: &SurvivalSample, estimand: &EstimandKind) -> Result<f64> {
    let arm_estimate = |arm: u8| -> Result<f64> {
        let rows = sample.arm_rows(arm);
        if rows.is_empty() {
            return Err(Error::InvalidSample(format!("arm {arm} has no subjects")));
        }
        let times: Vec<f64> = rows.iter().map(|&r| sample.times()[r]).collect();
        let status: Vec<u32> = rows.iter().map(|&r| sample.status()[r]).collect();
        let table = RiskTable::from_observations(&times, &status, sample.num_causes())?;
        estimand.estimate(&table)
    };
    Ok(arm_estimate(1)? - arm_estimate(0)?)
}
