//! Nonparametric survival estimation for right-censored data.
//!
//! Observations are aggregated into a [`RiskTable`] (the counting-process view:
//! distinct event times, per-cause event counts and the number at risk just
//! before each time). Kaplan-Meier, restricted mean survival time, Nelson-Aalen
//! increments and the Aalen-Johansen cumulative incidence are all read off that
//! table.
//!
//! Conventions:
//! - a censoring tied with an event time is processed after the event, so the
//!   censored subject is still counted at risk at that time;
//! - step curves are right-continuous, so the value at an event time includes
//!   that time's factor;
//! - evaluating beyond the largest observed time is an error, never an
//!   extrapolation.

use crate::error::{Error, Result};

/// Right-censored (optionally competing-risks) observations with treatment,
/// mediator and confounders.
///
/// Status `0` means censored; `j >= 1` is a terminal event of cause `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSample {
    ids: Vec<u64>,
    times: Vec<f64>,
    status: Vec<u32>,
    arm: Vec<u8>,
    mediator: Vec<f64>,
    covariate_names: Vec<String>,
    covariates: Vec<Vec<f64>>,
    num_causes: u32,
}

impl SurvivalSample {
    /// Builds a sample without confounders. Ids default to `1..=n`.
    pub fn new(times: Vec<f64>, status: Vec<u32>, arm: Vec<u8>, mediator: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        for (name, len) in [("status", status.len()), ("arm", arm.len()), ("mediator", mediator.len())] {
            if len != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has {len} entries, times has {n}"
                )));
            }
        }
        validate_times(&times)?;
        if let Some(i) = arm.iter().position(|&a| a > 1) {
            return Err(Error::InvalidSample(format!(
                "arm of subject {i} is {}, expected 0 or 1",
                arm[i]
            )));
        }
        if let Some(i) = mediator.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidSample(format!("mediator of subject {i} is missing or non-finite")));
        }
        let num_causes = status.iter().copied().max().unwrap_or(0);
        if num_causes == 0 {
            return Err(Error::InvalidSample("no events observed; every subject is censored".into()));
        }
        Ok(Self {
            ids: (1..=n as u64).collect(),
            times,
            status,
            arm,
            mediator,
            covariate_names: Vec::new(),
            covariates: Vec::new(),
            num_causes,
        })
    }

    /// Attaches named confounder columns (one `Vec` per covariate).
    pub fn with_covariates(mut self, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != self.len() {
                return Err(Error::DimensionMismatch(format!(
                    "covariate {name} has {} entries, sample has {}",
                    col.len(),
                    self.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSample(format!("covariate {name} has missing values")));
            }
        }
        self.covariate_names = names;
        self.covariates = columns;
        Ok(self)
    }

    pub fn with_ids(mut self, ids: Vec<u64>) -> Result<Self> {
        if ids.len() != self.len() {
            return Err(Error::DimensionMismatch("id column length".into()));
        }
        self.ids = ids;
        Ok(self)
    }

    /// Declares the number of competing causes. Needed when a cause is possible
    /// but unobserved in this particular sample (e.g. a bootstrap resample).
    pub fn with_num_causes(mut self, num_causes: u32) -> Result<Self> {
        let observed = self.status.iter().copied().max().unwrap_or(0);
        if num_causes < observed.max(1) {
            return Err(Error::InvalidSample(format!(
                "declared {num_causes} causes but status code {observed} is present"
            )));
        }
        self.num_causes = num_causes;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn status(&self) -> &[u32] {
        &self.status
    }

    pub fn arm(&self) -> &[u8] {
        &self.arm
    }

    pub fn mediator(&self) -> &[f64] {
        &self.mediator
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn covariates(&self) -> &[Vec<f64>] {
        &self.covariates
    }

    pub fn num_causes(&self) -> u32 {
        self.num_causes
    }

    pub fn max_followup(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::max)
    }

    /// Subset (with repetition allowed) by row indices. Event-free subsets are
    /// accepted here; estimators handle them.
    pub fn select(&self, rows: &[usize]) -> SurvivalSample {
        let pick_f = |v: &[f64]| rows.iter().map(|&r| v[r]).collect::<Vec<_>>();
        SurvivalSample {
            ids: rows.iter().map(|&r| self.ids[r]).collect(),
            times: pick_f(&self.times),
            status: rows.iter().map(|&r| self.status[r]).collect(),
            arm: rows.iter().map(|&r| self.arm[r]).collect(),
            mediator: pick_f(&self.mediator),
            covariate_names: self.covariate_names.clone(),
            covariates: self.covariates.iter().map(|c| pick_f(c)).collect(),
            num_causes: self.num_causes,
        }
    }

    /// Rows belonging to one treatment arm.
    pub fn arm_rows(&self, arm: u8) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.arm[i] == arm).collect()
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if let Some(i) = times.iter().position(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidSample(format!(
            "time of subject {i} is {}, expected a finite value >= 0",
            times[i]
        )));
    }
    Ok(())
}

/// Counting-process summary of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    event_times: Vec<f64>,
    /// `events[j - 1][k]`: cause-j events at `event_times[k]`.
    events: Vec<Vec<u32>>,
    /// All-cause events per event time.
    total_events: Vec<u32>,
    at_risk: Vec<u32>,
    n: usize,
    max_followup: f64,
}

impl RiskTable {
    /// Builds the table from raw observations. `num_causes` bounds the valid
    /// status codes.
    pub fn from_observations(times: &[f64], status: &[u32], num_causes: u32) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptySample);
        }
        if times.len() != status.len() {
            return Err(Error::DimensionMismatch("times and status lengths differ".into()));
        }
        validate_times(times)?;
        if let Some(i) = status.iter().position(|&s| s > num_causes) {
            return Err(Error::UnknownStatus { index: i, status: status[i] });
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        Ok(Self::from_sorted(
            order.iter().map(|&i| (times[i], status[i])),
            times.len(),
            num_causes,
        ))
    }

    /// Builds a table from observations already sorted by time.
    pub(crate) fn from_sorted<I>(sorted: I, n: usize, num_causes: u32) -> Self
    where
        I: IntoIterator<Item = (f64, u32)>,
    {
        let nc = num_causes.max(1) as usize;
        let mut table = RiskTable {
            event_times: Vec::new(),
            events: vec![Vec::new(); nc],
            total_events: Vec::new(),
            at_risk: Vec::new(),
            n,
            max_followup: 0.0,
        };
        let mut remaining = n as u32;
        let mut iter = sorted.into_iter().peekable();
        let mut counts = vec![0u32; nc];
        while let Some((t, s)) = iter.next() {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut group = 1u32;
            if s > 0 {
                counts[s as usize - 1] += 1;
            }
            while let Some(&(t2, s2)) = iter.peek() {
                if t2 != t {
                    break;
                }
                iter.next();
                group += 1;
                if s2 > 0 {
                    counts[s2 as usize - 1] += 1;
                }
            }
            let d: u32 = counts.iter().sum();
            if d > 0 {
                table.event_times.push(t);
                table.total_events.push(d);
                table.at_risk.push(remaining);
                for (j, c) in counts.iter().enumerate() {
                    table.events[j].push(*c);
                }
            }
            remaining -= group;
            table.max_followup = t;
        }
        table
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    /// Cause-`j` event counts per event time (`j` is 1-based).
    pub fn events(&self, cause: u32) -> Result<&[u32]> {
        self.check_cause(cause)?;
        Ok(&self.events[cause as usize - 1])
    }

    pub fn total_events(&self) -> &[u32] {
        &self.total_events
    }

    pub fn at_risk(&self) -> &[u32] {
        &self.at_risk
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_followup(&self) -> f64 {
        self.max_followup
    }

    pub fn num_causes(&self) -> u32 {
        self.events.len() as u32
    }

    pub(crate) fn check_cause(&self, cause: u32) -> Result<()> {
        if cause == 0 || cause > self.num_causes() {
            return Err(Error::UnknownCause { cause, max_cause: self.num_causes() });
        }
        Ok(())
    }

    pub(crate) fn check_tau(&self, tau: f64) -> Result<()> {
        if !tau.is_finite() || tau < 0.0 || tau > self.max_followup {
            return Err(Error::TauOutOfRange { tau, max_followup: self.max_followup });
        }
        Ok(())
    }

    /// Number of event times `<= tau`.
    pub(crate) fn count_through(&self, tau: f64) -> usize {
        self.event_times.partition_point(|&t| t <= tau)
    }

    /// All-cause product-limit factor `1 - d_k / Y_k`.
    pub(crate) fn km_factor(&self, k: usize) -> f64 {
        1.0 - f64::from(self.total_events[k]) / f64::from(self.at_risk[k])
    }
}

/// Builds the risk table for a sample.
pub fn build_risk_table(sample: &SurvivalSample) -> Result<RiskTable> {
    RiskTable::from_observations(sample.times(), sample.status(), sample.num_causes())
}

/// A right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCurve {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub value_before_first_knot: f64,
}

impl StepCurve {
    pub fn eval(&self, t: f64) -> f64 {
        match self.knots.partition_point(|&k| k <= t) {
            0 => self.value_before_first_knot,
            i => self.values[i - 1],
        }
    }

    /// Jumps at each knot.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = self.value_before_first_knot;
        self.values
            .iter()
            .map(|&v| {
                let d = v - prev;
                prev = v;
                d
            })
            .collect()
    }
}

/// Which events drive a hazard or incidence computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CauseSelector {
    All,
    Cause(u32),
}

/// Kaplan-Meier curve using all-cause events.
pub fn km_curve(table: &RiskTable) -> StepCurve {
    let mut s = 1.0;
    let values = (0..table.event_times.len())
        .map(|k| {
            s *= table.km_factor(k);
            s
        })
        .collect();
    StepCurve {
        knots: table.event_times.clone(),
        values,
        value_before_first_knot: 1.0,
    }
}

/// Kaplan-Meier survival probability at `tau`.
pub fn km_survival(table: &RiskTable, tau: f64) -> Result<f64> {
    table.check_tau(tau)?;
    Ok((0..table.count_through(tau)).map(|k| table.km_factor(k)).product())
}

/// Restricted mean survival time: exact area under the Kaplan-Meier step
/// curve on `[0, tau]`.
pub fn rmst(table: &RiskTable, tau: f64) -> Result<f64> {
    table.check_tau(tau)?;
    let mut area = 0.0;
    let mut s = 1.0;
    let mut prev = 0.0;
    for k in 0..table.count_through(tau) {
        let t = table.event_times[k];
        area += s * (t - prev);
        s *= table.km_factor(k);
        prev = t;
    }
    Ok(area + s * (tau - prev))
}

/// Nelson-Aalen cumulative hazard; `increments()` on the result gives
/// `dN(t_k) / Y(t_k)`.
pub fn nelson_aalen_increments(table: &RiskTable, cause: CauseSelector) -> Result<StepCurve> {
    let counts: &[u32] = match cause {
        CauseSelector::All => &table.total_events,
        CauseSelector::Cause(j) => table.events(j)?,
    };
    let mut cum = 0.0;
    let values = counts
        .iter()
        .zip(&table.at_risk)
        .map(|(&d, &y)| {
            cum += f64::from(d) / f64::from(y);
            cum
        })
        .collect();
    Ok(StepCurve {
        knots: table.event_times.clone(),
        values,
        value_before_first_knot: 0.0,
    })
}

/// Aalen-Johansen cumulative incidence curve for one cause.
pub fn cif_curve(table: &RiskTable, cause: u32) -> Result<StepCurve> {
    let counts = table.events(cause)?;
    let mut s_prev = 1.0;
    let mut f = 0.0;
    let mut values = Vec::with_capacity(counts.len());
    for k in 0..counts.len() {
        f += s_prev * f64::from(counts[k]) / f64::from(table.at_risk[k]);
        s_prev *= table.km_factor(k);
        values.push(f);
    }
    Ok(StepCurve {
        knots: table.event_times.clone(),
        values,
        value_before_first_knot: 0.0,
    })
}

/// Aalen-Johansen cumulative incidence of `cause` at `tau`.
pub fn aalen_johansen_cif(table: &RiskTable, cause: u32, tau: f64) -> Result<f64> {
    table.check_cause(cause)?;
    table.check_tau(tau)?;
    let counts = table.events(cause)?;
    let mut s_prev = 1.0;
    let mut f = 0.0;
    for k in 0..table.count_through(tau) {
        f += s_prev * f64::from(counts[k]) / f64::from(table.at_risk[k]);
        s_prev *= table.km_factor(k);
    }
    Ok(f)
}
