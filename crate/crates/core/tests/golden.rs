mod common;

use common::{evaluate_goldens, load_golden, GOLDEN_FILES, GOLDEN_TOLERANCE};

#[test]
fn every_golden_case_matches() {
    let outcomes = evaluate_goldens();
    assert!(outcomes.len() >= 14);
    for o in &outcomes {
        assert!(o.max_abs_error <= GOLDEN_TOLERANCE, "{}: error {}", o.label, o.max_abs_error);
    }
}

#[test]
fn golden_cases_document_their_arithmetic() {
    for file in GOLDEN_FILES {
        for case in load_golden(file).case {
            assert!(!case.derivation.trim().is_empty(), "{file}: {} lacks a derivation", case.quantity);
        }
    }
}

#[test]
fn jackknife_golden_means_recover_theta() {
    // Consistency of the committed numbers: in these examples the hand
    // pseudo-values average to the full-sample estimate.
    let golden = load_golden("four_subject.toml");
    for case in golden.case.iter().filter(|c| c.quantity.starts_with("jackknife")) {
        let mean = case.expected.iter().sum::<f64>() / case.expected.len() as f64;
        let theta_quantity = if case.quantity.ends_with("surv") { "km" } else { "rmst" };
        let theta = golden
            .case
            .iter()
            .find(|c| c.quantity == theta_quantity && c.sample == case.sample && c.tau == case.tau)
            .map(|c| c.expected[0])
            .unwrap_or_else(|| {
                common::compute(&golden.samples[&case.sample], theta_quantity, case.tau).unwrap()[0]
            });
        assert!((mean - theta).abs() < 1e-12, "{} mean {mean} vs {theta}", case.quantity);
    }
}
