//! Per-subject pseudo-values for survival, RMST and cumulative-incidence
//! estimands.
//!
//! Two generators are provided: the exact leave-one-out construction
//! `n * theta - (n - 1) * theta_(-i)`, and the influence-function
//! approximation `theta + phi_i`, where `phi_i` plugs the Kaplan-Meier curve,
//! Nelson-Aalen increments and the empirical `P(U > u)` into the martingale
//! representation of each estimator. The plug-in influence function coincides
//! with the infinitesimal jackknife of the estimator, so without censoring both
//! generators reproduce the uncensored transforms exactly.

use crate::error::{Error, Result};
use crate::survival::{aalen_johansen_cif, build_risk_table, km_survival, rmst, RiskTable, SurvivalSample};
use log::warn;

/// The functional of the event-time distribution being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    SurvivalProb,
    Rmst,
    /// Cumulative incidence of the given (1-based) cause.
    CumulativeIncidence(u32),
}

impl Scale {
    pub fn label(&self) -> String {
        match self {
            Scale::SurvivalProb => "surv".to_string(),
            Scale::Rmst => "rmst".to_string(),
            Scale::CumulativeIncidence(j) => format!("cif:{j}"),
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "surv" => Ok(Scale::SurvivalProb),
            "rmst" => Ok(Scale::Rmst),
            other => match other.strip_prefix("cif:").map(str::parse::<u32>) {
                Some(Ok(j)) if j >= 1 => Ok(Scale::CumulativeIncidence(j)),
                _ => Err(Error::InvalidArgument(format!(
                    "unknown estimand '{s}', expected surv, rmst or cif:<cause>"
                ))),
            },
        }
    }
}

impl std::fmt::Display for Scale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// An estimand: a scale evaluated at horizon `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimandKind {
    pub scale: Scale,
    pub tau: f64,
}

impl EstimandKind {
    pub fn new(scale: Scale, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { scale, tau })
    }

    pub fn survival(tau: f64) -> Result<Self> {
        Self::new(Scale::SurvivalProb, tau)
    }

    pub fn rmst(tau: f64) -> Result<Self> {
        Self::new(Scale::Rmst, tau)
    }

    pub fn cif(cause: u32, tau: f64) -> Result<Self> {
        if cause == 0 {
            return Err(Error::UnknownCause { cause, max_cause: 0 });
        }
        Self::new(Scale::CumulativeIncidence(cause), tau)
    }

    /// Evaluates the nonparametric estimator on a risk table.
    pub fn estimate(&self, table: &RiskTable) -> Result<f64> {
        match self.scale {
            Scale::SurvivalProb => km_survival(table, self.tau),
            Scale::Rmst => rmst(table, self.tau),
            Scale::CumulativeIncidence(j) => aalen_johansen_cif(table, j, self.tau),
        }
    }

    fn validate_for(&self, table: &RiskTable) -> Result<()> {
        if let Scale::CumulativeIncidence(j) = self.scale {
            table.check_cause(j)?;
        }
        table.check_tau(self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoMethod {
    Jackknife,
    InfluenceFunction,
}

impl std::str::FromStr for PseudoMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jackknife" | "jk" => Ok(PseudoMethod::Jackknife),
            "if" | "influence" => Ok(PseudoMethod::InfluenceFunction),
            _ => Err(Error::InvalidArgument(format!(
                "unknown pseudo-value method '{s}', expected jackknife or if"
            ))),
        }
    }
}

impl std::fmt::Display for PseudoMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PseudoMethod::Jackknife => "jackknife",
            PseudoMethod::InfluenceFunction => "if",
        })
    }
}

/// Pseudo-values aligned with the rows of the sample they came from.
///
/// Values for probability estimands may fall outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoValueSet {
    pub values: Vec<f64>,
    pub estimand: EstimandKind,
    pub method: PseudoMethod,
    pub theta_hat: f64,
}

impl PseudoValueSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Dispatches on `method`.
pub fn pseudo_values(sample: &SurvivalSample, estimand: &EstimandKind, method: PseudoMethod) -> Result<PseudoValueSet> {
    match method {
        PseudoMethod::Jackknife => jackknife_pseudo(sample, estimand),
        PseudoMethod::InfluenceFunction => if_pseudo(sample, estimand),
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("pseudo-values need n >= 2, got {n}")));
    }
    if n == 2 {
        warn!("pseudo-values from n = 2 subjects have extreme leverage");
    }
    Ok(())
}

/// Leave-one-out pseudo-values.
pub fn jackknife_pseudo(sample: &SurvivalSample, estimand: &EstimandKind) -> Result<PseudoValueSet> {
    let n = sample.len();
    check_size(n)?;
    let times = sample.times();
    let status = sample.status();
    let num_causes = sample.num_causes();
    let full = build_risk_table(sample)?;
    estimand.validate_for(&full)?;
    let theta_hat = estimand.estimate(&full)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let nf = n as f64;
    let values = (0..n)
        .map(|i| {
            let loo = RiskTable::from_sorted(
                order.iter().filter(|&&r| r != i).map(|&r| (times[r], status[r])),
                n - 1,
                num_causes,
            );
            if estimand.tau > loo.max_followup() {
                return Err(Error::JackknifeSupport {
                    index: i,
                    tau: estimand.tau,
                    max_followup: loo.max_followup(),
                });
            }
            let theta_loo = estimand.estimate(&loo)?;
            Ok(nf * theta_hat - (nf - 1.0) * theta_loo)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PseudoValueSet {
        values,
        estimand: *estimand,
        method: PseudoMethod::Jackknife,
        theta_hat,
    })
}

/// Influence-function pseudo-values `theta_hat + phi_i`.
///
/// Every integral is a finite sum over event times `<= tau`; after one sort
/// the whole computation is a backward pass for the coefficients, a forward
/// prefix sum for the compensators and a binary search per subject.
pub fn if_pseudo(sample: &SurvivalSample, estimand: &EstimandKind) -> Result<PseudoValueSet> {
    let n = sample.len();
    check_size(n)?;
    let table = build_risk_table(sample)?;
    estimand.validate_for(&table)?;
    let theta_hat = estimand.estimate(&table)?;
    let coef = IfCoefficients::new(&table, estimand)?;

    let tau = estimand.tau;
    let values = sample
        .times()
        .iter()
        .zip(sample.status())
        .map(|(&u, &s)| theta_hat + coef.influence(u, s, tau))
        .collect();

    Ok(PseudoValueSet {
        values,
        estimand: *estimand,
        method: PseudoMethod::InfluenceFunction,
        theta_hat,
    })
}

/// Weights of the subject-level martingale increments in `phi_i`.
///
/// With `c_k = n * S(t_k-) / Y_k`, the all-cause weight `a_k` and cause-j
/// weight `b_k` are:
/// - survival: `a_k = -c_k * prod_{k < m <= K} f_m`;
/// - RMST: `a_k = -c_k * int_{t_k}^tau prod_{k < m <= t} f_m dt`;
/// - CIF: `a_k = -c_k * sum_{m > k} (prod_{k < l < m} f_l) dN_j(t_m) / Y_m`,
///   `b_k = c_k`.
///
/// These equal `S(tau) n / (Y_k - d_k)`, `nu_tau(t_k) n / (Y_k - d_k)` and
/// `(F_j(tau) - F_j(t_k)) n / (Y_k - d_k)` whenever `Y_k > d_k`, and stay finite
/// when the last risk set is exhausted.
struct IfCoefficients<'a> {
    table: &'a RiskTable,
    cause: Option<u32>,
    all_cause: Vec<f64>,
    by_cause: Vec<f64>,
    /// Prefix sums of the compensator weights `a_k d_k / Y_k + b_k d_jk / Y_k`.
    compensator: Vec<f64>,
}

impl<'a> IfCoefficients<'a> {
    fn new(table: &'a RiskTable, estimand: &EstimandKind) -> Result<Self> {
        let tau = estimand.tau;
        let kmax = table.count_through(tau);
        let n = table.n() as f64;
        let times = table.event_times();
        let at_risk = table.at_risk();
        let d_all = table.total_events();
        let factor: Vec<f64> = (0..kmax).map(|k| table.km_factor(k)).collect();

        let mut s_before = 1.0;
        let c: Vec<f64> = (0..kmax)
            .map(|k| {
                let ck = n * s_before / f64::from(at_risk[k]);
                s_before *= factor[k];
                ck
            })
            .collect();

        // Backward accumulation of the tail term attached to each event time.
        let mut tail = vec![0.0; kmax];
        let cause = match estimand.scale {
            Scale::CumulativeIncidence(j) => Some(j),
            _ => None,
        };
        match estimand.scale {
            Scale::SurvivalProb => {
                let mut r = 1.0;
                for k in (0..kmax).rev() {
                    tail[k] = r;
                    r *= factor[k];
                }
            }
            Scale::Rmst => {
                let mut next_time = tau;
                let mut nu = 0.0;
                for k in (0..kmax).rev() {
                    // nu_k = (t_{k+1} - t_k) + f_{k+1} * nu_{k+1}, with t_{K+1} = tau.
                    let f_next = if k + 1 < kmax { factor[k + 1] } else { 1.0 };
                    nu = (next_time - times[k]) + f_next * nu;
                    tail[k] = nu;
                    next_time = times[k];
                }
            }
            Scale::CumulativeIncidence(j) => {
                let d_j = table.events(j)?;
                let mut g = 0.0;
                for k in (0..kmax).rev() {
                    tail[k] = g;
                    g = f64::from(d_j[k]) / f64::from(at_risk[k]) + factor[k] * g;
                }
            }
        }

        let all_cause: Vec<f64> = (0..kmax).map(|k| -c[k] * tail[k]).collect();
        let by_cause: Vec<f64> = if cause.is_some() { c } else { Vec::new() };

        let d_j = match cause {
            Some(j) => Some(table.events(j)?),
            None => None,
        };
        let mut acc = 0.0;
        let compensator = (0..kmax)
            .map(|k| {
                let y = f64::from(at_risk[k]);
                acc += all_cause[k] * f64::from(d_all[k]) / y;
                if let Some(dj) = d_j {
                    acc += by_cause[k] * f64::from(dj[k]) / y;
                }
                acc
            })
            .collect();

        Ok(Self {
            table,
            cause,
            all_cause,
            by_cause,
            compensator,
        })
    }

    /// `phi_i` for a subject observed at `time` with `status`.
    fn influence(&self, time: f64, status: u32, tau: f64) -> f64 {
        let horizon = time.min(tau);
        let m = self.table.event_times()[..self.compensator.len()].partition_point(|&t| t <= horizon);
        let mut phi = if m > 0 { -self.compensator[m - 1] } else { 0.0 };
        if status > 0 && time <= tau {
            // The subject's own jump sits at event time index m - 1.
            let k = m - 1;
            phi += self.all_cause[k];
            if self.cause == Some(status) {
                phi += self.by_cause[k];
            }
        }
        phi
    }
}

/// Agreement between two pseudo-value sets for the same sample and estimand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub r_squared: f64,
    pub max_abs_diff: f64,
}

/// R-squared of the simple regression of one set on the other, plus the
/// largest elementwise discrepancy.
pub fn pseudo_agreement(a: &PseudoValueSet, b: &PseudoValueSet) -> Result<Agreement> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "pseudo-value sets have {} and {} entries",
            a.len(),
            b.len()
        )));
    }
    if a.estimand != b.estimand {
        return Err(Error::InvalidArgument("pseudo-value sets target different estimands".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptySample);
    }
    let max_abs_diff = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let (ma, mb) = (a.mean(), b.mean());
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.values.iter().zip(&b.values) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let r_squared = if saa == 0.0 || sbb == 0.0 {
        if max_abs_diff == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        sab * sab / (saa * sbb)
    };
    Ok(Agreement { r_squared, max_abs_diff })
}
