//! Text reports and delimited tables.

use crate::inference::{EffectInference, InferenceResult, PropStatus};
use crate::linear::{CovarianceKind, LinearFit};
use crate::mediation::MediationFit;
use crate::survival::SurvivalSample;
use std::fmt::Write;

pub const DEFAULT_PRECISION: usize = 6;

/// Fixed-point formatting with `precision` decimals. Negative zero prints as
/// zero and non-finite values as `NA`, so output is platform stable.
pub fn fmt_fixed(x: f64, precision: usize) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    let s = format!("{x:.precision$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// Left-aligned first column, right-aligned remaining columns.
pub(crate) fn aligned_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut l = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(l, "{cell:<w$}");
            } else {
                let _ = write!(l, "  {cell:>w$}");
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

pub(crate) fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn coefficient_rows(fit: &LinearFit, p: usize) -> Vec<Vec<String>> {
    fit.regressor_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            vec![
                name.clone(),
                fmt_fixed(fit.coefficients[i], p),
                fmt_fixed(fit.covariance[(i, i)].sqrt(), p),
            ]
        })
        .collect()
}

const EFFECT_HEADER: [&str; 7] = ["effect", "estimate", "std_error", "ci_lower", "ci_upper", "p_value", "significant"];

fn effect_row(name: &str, e: &EffectInference, alpha: f64, p: usize) -> Vec<String> {
    vec![
        name.to_string(),
        fmt_fixed(e.estimate, p),
        fmt_fixed(e.se, p),
        fmt_fixed(e.ci_lower, p),
        fmt_fixed(e.ci_upper, p),
        fmt_fixed(e.p_value, p),
        if e.rejects(alpha) { "yes" } else { "no" }.to_string(),
    ]
}

fn effect_rows(result: &InferenceResult, p: usize) -> Vec<Vec<String>> {
    vec![
        effect_row("NDE", &result.nde, result.alpha, p),
        effect_row("NIE", &result.nie, result.alpha, p),
        effect_row("TE", &result.te, result.alpha, p),
    ]
}

/// Machine-readable effects table.
pub fn effects_csv(result: &InferenceResult, precision: usize) -> String {
    csv_table(&EFFECT_HEADER, &effect_rows(result, precision))
}

pub(crate) struct MediateReport<'a> {
    pub input: &'a str,
    pub sample: &'a SurvivalSample,
    pub fit: &'a MediationFit,
    pub result: &'a InferenceResult,
    pub unadjusted_te: f64,
    pub covariance: CovarianceKind,
    pub precision: usize,
}

impl MediateReport<'_> {
    pub fn render(&self) -> String {
        let p = self.precision;
        let s = self.sample;
        let fit = self.fit;
        let res = self.result;
        let est = fit.effects.scale;
        let n1 = s.arm().iter().filter(|&&a| a == 1).count();
        let events = s.status().iter().filter(|&&d| d > 0).count();
        let mut out = String::new();
        let _ = writeln!(out, "pseudomed mediation report");
        let _ = writeln!(out, "precision: {p} decimal places");
        let _ = writeln!(out, "input: {}", self.input);
        let _ = writeln!(
            out,
            "subjects: {} (arm 0: {}, arm 1: {}); events: {}; censored: {}",
            s.len(),
            s.len() - n1,
            n1,
            events,
            s.len() - events
        );
        let _ = writeln!(out, "estimand: {} at tau = {}", est.scale, fmt_fixed(est.tau, p));
        let _ = writeln!(out, "pseudo-values: {}", fit.pseudo.method);
        let _ = writeln!(out, "inference: {}, alpha = {}", res.method.label(), fmt_fixed(res.alpha, p));
        let _ = writeln!(
            out,
            "covariance: {}",
            match self.covariance {
                CovarianceKind::Classical => "classical",
                CovarianceKind::Hc1 => "HC1 robust",
            }
        );
        if res.redraws > 0 {
            let _ = writeln!(out, "bootstrap redraws of degenerate resamples: {}", res.redraws);
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "theta_hat (pooled sample): {}", fmt_fixed(fit.theta_hat, p));
        let _ = writeln!(out);
        let _ = writeln!(out, "Mediator model: M ~ A{}", covariate_suffix(&fit.mediator_fit, 2));
        out.push_str(&aligned_table(&["term", "estimate", "std_error"], &coefficient_rows(&fit.mediator_fit, p)));
        let _ = writeln!(out);
        let _ = writeln!(out, "Outcome model: pseudo-value ~ A + M{}", covariate_suffix(&fit.outcome_fit, 3));
        out.push_str(&aligned_table(&["term", "estimate", "std_error"], &coefficient_rows(&fit.outcome_fit, p)));
        let _ = writeln!(out);
        let _ = writeln!(out, "Effects");
        out.push_str(&aligned_table(&EFFECT_HEADER, &effect_rows(res, p)));
        let _ = writeln!(out);
        let prop = match (res.prop_status, res.effects.prop_mediated) {
            (PropStatus::Reported, Some(v)) => fmt_fixed(v, p),
            (PropStatus::Unstable, Some(v)) => format!("{} (unstable: TE small or NIE of opposite sign)", fmt_fixed(v, p)),
            _ => "undefined (TE = 0)".to_string(),
        };
        let _ = writeln!(out, "proportion mediated: {prop}");
        if let Some((lo, hi)) = res.prop_ci {
            let _ = writeln!(out, "proportion mediated percentile CI: [{}, {}]", fmt_fixed(lo, p), fmt_fixed(hi, p));
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "Total-effect cross-check");
        let _ = writeln!(out, "arm difference of estimand: {}", fmt_fixed(self.unadjusted_te, p));
        let _ = writeln!(out, "TE = NDE + NIE:             {}", fmt_fixed(res.effects.te, p));
        let _ = writeln!(out, "difference:                 {}", fmt_fixed(res.effects.te - self.unadjusted_te, p));
        out
    }
}

fn covariate_suffix(fit: &LinearFit, skip: usize) -> String {
    fit.regressor_names
        .iter()
        .skip(skip)
        .map(|n| format!(" + {n}"))
        .collect()
}
