//! C interface to `pseudomed`.
//!
//! Every function returns a [`PmStatus`]. On failure a description is kept
//! per thread and can be read with [`pm_last_error`]. Samples are opaque
//! handles created by [`pm_sample_new`] and released by [`pm_sample_free`].

use pseudomed::inference::{infer, EffectInference, InferenceMethod};
use pseudomed::linear::CovarianceKind;
use pseudomed::mediation::{mediate, AnalysisSpec};
use pseudomed::pseudo::{pseudo_values, EstimandKind, PseudoMethod, Scale};
use pseudomed::simlab::{true_effects, ScenarioConfig};
use pseudomed::survival::{aalen_johansen_cif, build_risk_table, km_survival, rmst, SurvivalSample};
use pseudomed::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSample = 3,
    TauOutOfRange = 4,
    RankDeficient = 5,
    Unsupported = 6,
    EstimationFailed = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmScale {
    Survival = 0,
    Rmst = 1,
    /// Cumulative incidence; the cause is passed separately.
    Cif = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmPseudoMethod {
    InfluenceFunction = 0,
    Jackknife = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmInference {
    Delta = 0,
    Sobel = 1,
    Bootstrap = 2,
}

/// Estimand selector: scale, cause (used only for `Cif`) and horizon.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmEstimand {
    pub scale: PmScale,
    pub cause: u32,
    pub tau: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmEffect {
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub p_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmMediationResult {
    pub theta_hat: f64,
    pub alpha_a: f64,
    pub beta_a: f64,
    pub beta_m: f64,
    pub nde: PmEffect,
    pub nie: PmEffect,
    pub te: PmEffect,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmInferenceOptions {
    pub method: PmInference,
    pub pseudo: PmPseudoMethod,
    /// Nonzero for HC1 robust standard errors.
    pub robust_se: i32,
    pub alpha: f64,
    pub boot_reps: usize,
    pub seed: u64,
    /// Nonzero to resample within arms.
    pub stratified: i32,
}

/// Simulation scenario for the truth oracle. A `lambda_d <= 0` means no
/// competing event.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmScenario {
    pub k: f64,
    pub direct_effect: i32,
    pub indirect_effect: i32,
    pub mu0: f64,
    pub mu1: f64,
    pub lambda_d: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmTrueEffects {
    pub te: f64,
    pub nde: f64,
    pub nie: f64,
}

/// Opaque sample handle.
pub struct PmSample {
    inner: SurvivalSample,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PmStatus {
    match e {
        Error::EmptySample
        | Error::InvalidSample(_)
        | Error::UnknownStatus { .. }
        | Error::UnknownCause { .. }
        | Error::DimensionMismatch(_) => PmStatus::InvalidSample,
        Error::TauOutOfRange { .. } | Error::JackknifeSupport { .. } => PmStatus::TauOutOfRange,
        Error::RankDeficient { .. } | Error::TooFewObservations { .. } => PmStatus::RankDeficient,
        Error::Unsupported(_) => PmStatus::Unsupported,
        Error::InvalidArgument(_) | Error::Config(_) => PmStatus::InvalidArgument,
        Error::BootstrapExhausted { .. } => PmStatus::EstimationFailed,
    }
}

struct Failure(PmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PmStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            PmStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn sample_ref<'a>(sample: *const PmSample) -> Result<&'a SurvivalSample, Failure> {
    sample.as_ref().map(|s| &s.inner).ok_or_else(|| null("sample"))
}

unsafe fn out_ref<'a, T>(out: *mut T) -> Result<&'a mut T, Failure> {
    out.as_mut().ok_or_else(|| null("output pointer"))
}

fn estimand(e: PmEstimand) -> Result<EstimandKind, Failure> {
    let scale = match e.scale {
        PmScale::Survival => Scale::SurvivalProb,
        PmScale::Rmst => Scale::Rmst,
        PmScale::Cif => Scale::CumulativeIncidence(e.cause),
    };
    Ok(EstimandKind::new(scale, e.tau)?)
}

fn pseudo_method(m: PmPseudoMethod) -> PseudoMethod {
    match m {
        PmPseudoMethod::InfluenceFunction => PseudoMethod::InfluenceFunction,
        PmPseudoMethod::Jackknife => PseudoMethod::Jackknife,
    }
}

/// Message describing the last failed call on this thread; empty after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a sample from `n` subjects. `status` uses 0 for censored and
/// `j >= 1` for cause `j`; `arm` is 0 or 1. The arrays are copied.
///
/// # Safety
/// Each array pointer must be valid for `n` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pm_sample_new(
    times: *const f64,
    status: *const u32,
    arm: *const u8,
    mediator: *const f64,
    n: usize,
    out: *mut *mut PmSample,
) -> PmStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let sample = SurvivalSample::new(
            slice(times, n, "times")?.to_vec(),
            slice(status, n, "status")?.to_vec(),
            slice(arm, n, "arm")?.to_vec(),
            slice(mediator, n, "mediator")?.to_vec(),
        )?;
        *out = Box::into_raw(Box::new(PmSample { inner: sample }));
        Ok(())
    })
}

/// Releases a sample. Passing null is a no-op.
///
/// # Safety
/// `sample` must come from [`pm_sample_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pm_sample_free(sample: *mut PmSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Number of subjects, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pm_sample_len(sample: *const PmSample) -> usize {
    sample.as_ref().map_or(0, |s| s.inner.len())
}

/// Nonparametric estimate of the estimand from the pooled sample
/// (Kaplan-Meier survival, RMST, or Aalen-Johansen cumulative incidence).
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pm_estimate(sample: *const PmSample, est: PmEstimand, out: *mut f64) -> PmStatus {
    guard(|| {
        let s = sample_ref(sample)?;
        let out = out_ref(out)?;
        let table = build_risk_table(s)?;
        *out = match est.scale {
            PmScale::Survival => km_survival(&table, est.tau)?,
            PmScale::Rmst => rmst(&table, est.tau)?,
            PmScale::Cif => aalen_johansen_cif(&table, est.cause, est.tau)?,
        };
        Ok(())
    })
}

/// Writes one pseudo-value per subject into `out` (capacity `len`).
///
/// # Safety
/// `sample` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pm_pseudo_values(
    sample: *const PmSample,
    est: PmEstimand,
    method: PmPseudoMethod,
    out: *mut f64,
    len: usize,
) -> PmStatus {
    guard(|| {
        let s = sample_ref(sample)?;
        if len < s.len() {
            return Err(Failure(
                PmStatus::BufferTooSmall,
                format!("buffer holds {len} values, sample has {}", s.len()),
            ));
        }
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let set = pseudo_values(s, &estimand(est)?, pseudo_method(method))?;
        std::slice::from_raw_parts_mut(out, s.len()).copy_from_slice(&set.values);
        Ok(())
    })
}

fn effect(e: &EffectInference) -> PmEffect {
    PmEffect {
        estimate: e.estimate,
        se: e.se,
        ci_lower: e.ci_lower,
        ci_upper: e.ci_upper,
        p_value: e.p_value,
    }
}

/// Fits the mediation model and reports NDE, NIE and TE with inference.
///
/// # Safety
/// `sample` must be a live handle, `options` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pm_mediate(
    sample: *const PmSample,
    est: PmEstimand,
    options: *const PmInferenceOptions,
    out: *mut PmMediationResult,
) -> PmStatus {
    guard(|| {
        let s = sample_ref(sample)?;
        let opts = options.as_ref().ok_or_else(|| null("options"))?;
        let out = out_ref(out)?;
        let spec = AnalysisSpec::new(estimand(est)?)
            .with_pseudo_method(pseudo_method(opts.pseudo))
            .with_covariance(if opts.robust_se != 0 { CovarianceKind::Hc1 } else { CovarianceKind::Classical });
        let method = match opts.method {
            PmInference::Delta => InferenceMethod::Delta,
            PmInference::Sobel => InferenceMethod::Sobel,
            PmInference::Bootstrap => InferenceMethod::Bootstrap {
                reps: opts.boot_reps,
                seed: opts.seed,
                stratified: opts.stratified != 0,
            },
        };
        let fit = mediate(s, &spec)?;
        let result = infer(s, &spec, method, opts.alpha)?;
        let coef = |f: &pseudomed::linear::LinearFit, name: &str| f.coef(name).unwrap_or(f64::NAN);
        *out = PmMediationResult {
            theta_hat: fit.theta_hat,
            alpha_a: coef(&fit.mediator_fit, pseudomed::mediation::TREATMENT),
            beta_a: coef(&fit.outcome_fit, pseudomed::mediation::TREATMENT),
            beta_m: coef(&fit.outcome_fit, pseudomed::mediation::MEDIATOR),
            nde: effect(&result.nde),
            nie: effect(&result.nie),
            te: effect(&result.te),
        };
        Ok(())
    })
}

/// True natural effects of the exponential simulation model at `est.tau`.
///
/// # Safety
/// `scenario` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pm_true_effects(
    scenario: *const PmScenario,
    est: PmEstimand,
    out: *mut PmTrueEffects,
) -> PmStatus {
    guard(|| {
        let sc = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let out = out_ref(out)?;
        let kind = estimand(est)?;
        let mut config = ScenarioConfig::new(1, pseudomed::simlab::EffectCase::NoEffect, kind.tau);
        config.k = sc.k;
        config.direct_effect = sc.direct_effect != 0;
        config.indirect_effect = sc.indirect_effect != 0;
        config.mu0 = sc.mu0;
        config.mu1 = sc.mu1;
        if sc.lambda_d > 0.0 {
            config = config.with_competing(sc.lambda_d);
        }
        let t = true_effects(&config, kind.scale)?;
        *out = PmTrueEffects {
            te: t.te,
            nde: t.nde,
            nie: t.nie,
        };
        Ok(())
    })
}
