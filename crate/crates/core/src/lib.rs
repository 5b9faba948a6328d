//! Causal mediation analysis for time-to-event outcomes using pseudo-values.
//!
//! The pipeline: estimate a survival functional (survival probability, RMST or
//! cumulative incidence) nonparametrically, turn it into per-subject
//! pseudo-values, regress the mediator on treatment and the pseudo-values on
//! treatment and mediator, and combine the coefficients into natural direct
//! and indirect effects.
//!
//! ```
//! use pseudomed::prelude::*;
//!
//! let config = ScenarioConfig::new(100, EffectCase::Both, 2.0).with_seed(7);
//! let sample = simulate_trial(&config).unwrap();
//! let spec = AnalysisSpec::new(EstimandKind::survival(2.0).unwrap());
//! let result = infer(&sample, &spec, InferenceMethod::Delta, 0.05).unwrap();
//! assert_eq!(result.effects.te, result.effects.nde + result.effects.nie);
//! ```

pub mod cli;
pub mod error;
pub mod inference;
pub mod linear;
pub mod mediation;
pub mod pseudo;
pub mod simlab;
pub mod survival;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::inference::{
        bootstrap_inference, delta_inference, infer, sobel_inference, sobel_se, BootstrapOptions, EffectInference,
        InferenceMethod, InferenceResult, PropStatus,
    };
    pub use crate::linear::{ols_fit, CovarianceKind, LinearFit};
    pub use crate::mediation::{
        decompose_effects, fit_mediator_model, fit_outcome_model, mediate, unadjusted_total_effect, AnalysisSpec,
        MediationEffects, MediationFit,
    };
    pub use crate::pseudo::{
        if_pseudo, jackknife_pseudo, pseudo_agreement, pseudo_values, EstimandKind, PseudoMethod, PseudoValueSet,
        Scale,
    };
    pub use crate::simlab::{
        simulate_competing, simulate_trial, true_effects, EffectCase, ScenarioConfig, TrueEffects,
    };
    pub use crate::survival::{
        aalen_johansen_cif, build_risk_table, km_survival, nelson_aalen_increments, rmst, CauseSelector, RiskTable,
        StepCurve, SurvivalSample,
    };
}
