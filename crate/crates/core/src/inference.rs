//! Standard errors, confidence intervals and p-values for mediation effects.
//!
//! Three routes: the first-order multivariate delta method, the Sobel (second
//! order) standard error for the indirect effect, and a nonparametric
//! bootstrap that recomputes pseudo-values inside every resample.
//!
//! The two regressions are fitted separately, so their coefficient blocks are
//! treated as independent; within the outcome model the `A`/`M` covariance is
//! used.

use crate::error::{Error, Result};
use crate::linear::LinearFit;
use crate::mediation::{decompose_effects, mediate, AnalysisSpec, MediationEffects, MEDIATOR, TREATMENT};
use crate::pseudo::EstimandKind;
use crate::survival::SurvivalSample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferenceMethod {
    Delta,
    Sobel,
    Bootstrap { reps: usize, seed: u64, stratified: bool },
}

impl InferenceMethod {
    pub fn label(&self) -> String {
        match self {
            InferenceMethod::Delta => "delta".into(),
            InferenceMethod::Sobel => "sobel".into(),
            InferenceMethod::Bootstrap { reps, seed, stratified } => format!(
                "bootstrap(B={reps}, seed={seed}, percentile{})",
                if *stratified { ", arm-stratified" } else { "" }
            ),
        }
    }
}

/// Inference for one effect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectInference {
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub p_value: f64,
}

impl EffectInference {
    pub fn covers(&self, value: f64) -> bool {
        self.ci_lower <= value && value <= self.ci_upper
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropStatus {
    /// `te` and `nie` share sign and `|te|` exceeds its standard error.
    Reported,
    Unstable,
    /// `te == 0`.
    Undefined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub effects: MediationEffects,
    pub nde: EffectInference,
    pub nie: EffectInference,
    pub te: EffectInference,
    pub prop_status: PropStatus,
    /// Percentile interval for the proportion mediated (bootstrap only).
    pub prop_ci: Option<(f64, f64)>,
    pub method: InferenceMethod,
    pub alpha: f64,
    /// Degenerate bootstrap resamples that were redrawn.
    pub redraws: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn critical_value(alpha: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - alpha / 2.0)
}

/// Two-sided Wald inference. A zero standard error gives a degenerate
/// interval and `p = 0` for a nonzero estimate, `p = 1` for a zero one.
pub fn wald(estimate: f64, se: f64, alpha: f64) -> EffectInference {
    let z = critical_value(alpha);
    let p_value = if se > 0.0 {
        erfc(estimate.abs() / se / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
    } else if estimate == 0.0 {
        1.0
    } else {
        0.0
    };
    EffectInference {
        estimate,
        se,
        ci_lower: estimate - z * se,
        ci_upper: estimate + z * se,
        p_value,
    }
}

struct Moments {
    alpha_a: f64,
    var_alpha_a: f64,
    beta_m: f64,
    var_beta_a: f64,
    var_beta_m: f64,
    cov_beta_am: f64,
}

impl Moments {
    fn from_fits(mediator_fit: &LinearFit, outcome_fit: &LinearFit) -> Result<Self> {
        let missing = |what: &str| Error::InvalidArgument(format!("fit has no '{what}' coefficient"));
        let m = Moments {
            alpha_a: mediator_fit.coef(TREATMENT).ok_or_else(|| missing(TREATMENT))?,
            var_alpha_a: mediator_fit.variance(TREATMENT).ok_or_else(|| missing(TREATMENT))?,
            beta_m: outcome_fit.coef(MEDIATOR).ok_or_else(|| missing(MEDIATOR))?,
            var_beta_a: outcome_fit.variance(TREATMENT).ok_or_else(|| missing(TREATMENT))?,
            var_beta_m: outcome_fit.variance(MEDIATOR).ok_or_else(|| missing(MEDIATOR))?,
            cov_beta_am: outcome_fit
                .covariance_between(TREATMENT, MEDIATOR)
                .ok_or_else(|| missing(MEDIATOR))?,
        };
        if m.var_alpha_a < 0.0 || m.var_beta_a < 0.0 || m.var_beta_m < 0.0 {
            return Err(Error::InvalidArgument("negative coefficient variance".into()));
        }
        Ok(m)
    }

    fn nie_var_first_order(&self) -> f64 {
        self.alpha_a.powi(2) * self.var_beta_m + self.beta_m.powi(2) * self.var_alpha_a
    }

    fn te_var_first_order(&self) -> f64 {
        (self.var_beta_a
            + self.nie_var_first_order()
            + 2.0 * self.alpha_a * self.cov_beta_am)
            .max(0.0)
    }
}

/// Second-order (Sobel/Aroian) standard error of `alpha_A * beta_M`.
pub fn sobel_se(mediator_fit: &LinearFit, outcome_fit: &LinearFit) -> Result<f64> {
    let m = Moments::from_fits(mediator_fit, outcome_fit)?;
    Ok(sobel_from_parts(m.alpha_a, m.var_alpha_a, m.beta_m, m.var_beta_m))
}

pub fn sobel_from_parts(alpha_a: f64, var_alpha_a: f64, beta_m: f64, var_beta_m: f64) -> f64 {
    (alpha_a.powi(2) * var_beta_m + beta_m.powi(2) * var_alpha_a + var_beta_m * var_alpha_a).sqrt()
}

fn prop_status(effects: &MediationEffects, te_se: f64) -> PropStatus {
    if effects.te == 0.0 {
        PropStatus::Undefined
    } else if effects.te.signum() == effects.nie.signum() && effects.te.abs() > te_se {
        PropStatus::Reported
    } else {
        PropStatus::Unstable
    }
}

/// First-order delta-method inference with Wald p-values and normal CIs.
pub fn delta_inference(
    mediator_fit: &LinearFit,
    outcome_fit: &LinearFit,
    scale: EstimandKind,
    alpha: f64,
) -> Result<InferenceResult> {
    analytic_inference(mediator_fit, outcome_fit, scale, alpha, InferenceMethod::Delta)
}

/// As [`delta_inference`] but with the second-order product-variance term
/// added to the NIE and TE variances.
pub fn sobel_inference(
    mediator_fit: &LinearFit,
    outcome_fit: &LinearFit,
    scale: EstimandKind,
    alpha: f64,
) -> Result<InferenceResult> {
    analytic_inference(mediator_fit, outcome_fit, scale, alpha, InferenceMethod::Sobel)
}

fn analytic_inference(
    mediator_fit: &LinearFit,
    outcome_fit: &LinearFit,
    scale: EstimandKind,
    alpha: f64,
    method: InferenceMethod,
) -> Result<InferenceResult> {
    check_alpha(alpha)?;
    let m = Moments::from_fits(mediator_fit, outcome_fit)?;
    let effects = decompose_effects(mediator_fit, outcome_fit, scale)?;
    let product_term = match method {
        InferenceMethod::Sobel => m.var_alpha_a * m.var_beta_m,
        _ => 0.0,
    };
    let se_nde = m.var_beta_a.sqrt();
    let se_nie = (m.nie_var_first_order() + product_term).sqrt();
    let se_te = (m.te_var_first_order() + product_term).sqrt();
    Ok(InferenceResult {
        effects,
        nde: wald(effects.nde, se_nde, alpha),
        nie: wald(effects.nie, se_nie, alpha),
        te: wald(effects.te, se_te, alpha),
        prop_status: prop_status(&effects, se_te),
        prop_ci: None,
        method,
        alpha,
        redraws: 0,
    })
}

/// Runs the requested method on a sample: delta and Sobel use the full-sample
/// fits, the bootstrap repeats the whole procedure per resample.
pub fn infer(sample: &SurvivalSample, spec: &AnalysisSpec, method: InferenceMethod, alpha: f64) -> Result<InferenceResult> {
    match method {
        InferenceMethod::Delta | InferenceMethod::Sobel => {
            let fit = mediate(sample, spec)?;
            analytic_inference(&fit.mediator_fit, &fit.outcome_fit, spec.estimand, alpha, method)
        }
        InferenceMethod::Bootstrap { reps, seed, stratified } => {
            bootstrap_inference(sample, spec, &BootstrapOptions { reps, seed, stratified }, alpha)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapOptions {
    pub reps: usize,
    pub seed: u64,
    /// Resample within each arm, preserving arm sizes.
    pub stratified: bool,
}

pub const MIN_BOOTSTRAP_REPS: usize = 100;

/// Nonparametric bootstrap of pseudo-value generation, both regressions and
/// the decomposition, with percentile intervals.
///
/// Replicate `b` draws from its own ChaCha stream `(seed, b)`, so results do
/// not depend on the number of worker threads. Degenerate resamples (one arm
/// only, no events, or a failed fit) are redrawn from the same stream; more
/// than `10 * reps` redraws in total is an error.
pub fn bootstrap_inference(
    sample: &SurvivalSample,
    spec: &AnalysisSpec,
    options: &BootstrapOptions,
    alpha: f64,
) -> Result<InferenceResult> {
    check_alpha(alpha)?;
    if options.reps < MIN_BOOTSTRAP_REPS {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP_REPS} replicates, got {}",
            options.reps
        )));
    }
    let point = mediate(sample, spec)?;
    let cap = 10 * options.reps;
    let strata: Vec<Vec<usize>> = if options.stratified {
        vec![sample.arm_rows(0), sample.arm_rows(1)]
    } else {
        vec![(0..sample.len()).collect()]
    };

    let draws: Vec<(Option<MediationEffects>, usize)> = (0..options.reps)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(b as u64);
            let mut redraws = 0;
            let mut rows = Vec::with_capacity(sample.len());
            while redraws <= cap {
                rows.clear();
                for stratum in &strata {
                    for _ in 0..stratum.len() {
                        rows.push(stratum[rng.gen_range(0..stratum.len())]);
                    }
                }
                let resample = sample.select(&rows);
                if !is_degenerate(&resample) {
                    if let Ok(fit) = mediate(&resample, spec) {
                        return (Some(fit.effects), redraws);
                    }
                }
                redraws += 1;
            }
            (None, redraws)
        })
        .collect();

    let redraws: usize = draws.iter().map(|d| d.1).sum();
    if redraws > cap || draws.iter().any(|d| d.0.is_none()) {
        return Err(Error::BootstrapExhausted { redraws, cap });
    }
    let boot: Vec<MediationEffects> = draws.into_iter().filter_map(|d| d.0).collect();

    let summarize = |estimate: f64, pick: fn(&MediationEffects) -> f64| {
        let mut values: Vec<f64> = boot.iter().map(pick).collect();
        bootstrap_summary(estimate, &mut values, alpha)
    };
    let effects = point.effects;
    let nde = summarize(effects.nde, |e| e.nde);
    let nie = summarize(effects.nie, |e| e.nie);
    let te = summarize(effects.te, |e| e.te);

    let mut props: Vec<f64> = boot.iter().filter_map(|e| e.prop_mediated).collect();
    props.sort_by(f64::total_cmp);
    let prop_ci = (!props.is_empty()).then(|| {
        (
            quantile_sorted(&props, alpha / 2.0),
            quantile_sorted(&props, 1.0 - alpha / 2.0),
        )
    });

    Ok(InferenceResult {
        effects,
        nde,
        nie,
        te,
        prop_status: prop_status(&effects, te.se),
        prop_ci,
        method: InferenceMethod::Bootstrap {
            reps: options.reps,
            seed: options.seed,
            stratified: options.stratified,
        },
        alpha,
        redraws,
    })
}

fn is_degenerate(sample: &SurvivalSample) -> bool {
    let treated = sample.arm().iter().filter(|&&a| a == 1).count();
    treated == 0 || treated == sample.len() || sample.status().iter().all(|&s| s == 0)
}

fn bootstrap_summary(estimate: f64, values: &mut [f64], alpha: f64) -> EffectInference {
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    let se = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0)).sqrt();
    let below = values.iter().filter(|&&v| v <= 0.0).count() as f64;
    let above = values.iter().filter(|&&v| v >= 0.0).count() as f64;
    let p_value = (2.0 * ((below + 1.0) / (b + 1.0)).min((above + 1.0) / (b + 1.0))).min(1.0);
    values.sort_by(f64::total_cmp);
    EffectInference {
        estimate,
        se,
        ci_lower: quantile_sorted(values, alpha / 2.0),
        ci_upper: quantile_sorted(values, 1.0 - alpha / 2.0),
        p_value,
    }
}

/// Linear-interpolation sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sobel_hand_values() {
        assert_relative_eq!(sobel_from_parts(0.0, 0.3, 0.0, 0.3), 0.3, epsilon = 1e-15);
        assert_relative_eq!(sobel_from_parts(2.0, 0.04, 0.5, 0.0), (0.25f64 * 0.04).sqrt(), epsilon = 1e-15);
        // 1 * 0.01 + 0.25 * 0.04 + 0.01 * 0.04 = 0.0204
        assert_relative_eq!(sobel_from_parts(-1.0, 0.04, 0.5, 0.01), 0.0204f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(0.0204f64.sqrt(), 0.14283, epsilon = 5e-6);
    }

    #[test]
    fn wald_conventions() {
        let w = wald(1.96, 1.0, 0.05);
        assert_relative_eq!(w.p_value, 0.05, epsilon = 1e-4);
        assert_relative_eq!(w.ci_lower, 1.96 - 1.959964, epsilon = 1e-5);
        assert_eq!(wald(0.3, 0.0, 0.05).p_value, 0.0);
        assert_eq!(wald(0.0, 0.0, 0.05).p_value, 1.0);
        assert_eq!(wald(0.0, 1.0, 0.05).p_value, 1.0);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&v, 0.125), 1.5);
        assert_eq!(quantile_sorted(&v, 1.0), 5.0);
    }

    #[test]
    fn bootstrap_p_value_with_continuity_correction() {
        let mut v = vec![1.0; 99];
        v.push(-1.0);
        let s = bootstrap_summary(1.0, &mut v, 0.05);
        // below = 1 -> 2 * 2 / 101
        assert_relative_eq!(s.p_value, 4.0 / 101.0);
        let mut v = vec![0.0; 100];
        assert_eq!(bootstrap_summary(0.0, &mut v, 0.05).p_value, 1.0);
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(check_alpha(0.0).is_err());
        assert!(check_alpha(1.0).is_err());
        assert!(check_alpha(0.05).is_ok());
    }
}
