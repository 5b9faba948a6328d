#![allow(dead_code)]

use pseudomed::prelude::*;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Deserialize)]
pub struct GoldenSample {
    pub times: Vec<f64>,
    pub status: Vec<u32>,
}

#[derive(Debug, Deserialize)]
pub struct GoldenCase {
    pub sample: String,
    pub quantity: String,
    pub tau: f64,
    pub expected: Vec<f64>,
    pub derivation: String,
}

#[derive(Debug, Deserialize)]
pub struct GoldenFile {
    pub samples: BTreeMap<String, GoldenSample>,
    pub case: Vec<GoldenCase>,
}

pub const GOLDEN_FILES: [&str; 2] = ["four_subject.toml", "three_subject_competing.toml"];

pub fn load_golden(name: &str) -> GoldenFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    toml::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Value of `quantity` computed by the library for a golden sample.
pub fn compute(sample: &GoldenSample, quantity: &str, tau: f64) -> pseudomed::Result<Vec<f64>> {
    let causes = sample.status.iter().copied().max().unwrap_or(1).max(1);
    let table = RiskTable::from_observations(&sample.times, &sample.status, causes)?;
    let n = sample.times.len();
    let survival_sample = || {
        SurvivalSample::new(sample.times.clone(), sample.status.clone(), vec![0; n], vec![0.0; n])
    };
    Ok(match quantity {
        "km" => vec![km_survival(&table, tau)?],
        "rmst" => vec![rmst(&table, tau)?],
        "cif1" => vec![aalen_johansen_cif(&table, 1, tau)?],
        "cif2" => vec![aalen_johansen_cif(&table, 2, tau)?],
        "nelson_aalen_increments" => {
            let curve = nelson_aalen_increments(&table, CauseSelector::All)?;
            let keep = curve.knots.iter().filter(|&&t| t <= tau).count();
            curve.increments()[..keep].to_vec()
        }
        "jackknife_surv" => jackknife_pseudo(&survival_sample()?, &EstimandKind::survival(tau)?)?.values,
        "jackknife_rmst" => jackknife_pseudo(&survival_sample()?, &EstimandKind::rmst(tau)?)?.values,
        other => panic!("unknown golden quantity {other}"),
    })
}

pub struct GoldenOutcome {
    pub label: String,
    pub max_abs_error: f64,
}

/// Evaluates every golden case; the error is the largest absolute deviation.
pub fn evaluate_goldens() -> Vec<GoldenOutcome> {
    let mut out = Vec::new();
    for file in GOLDEN_FILES {
        let golden = load_golden(file);
        for case in &golden.case {
            let sample = &golden.samples[&case.sample];
            let label = format!("{file}: {} {} tau={}", case.sample, case.quantity, case.tau);
            let max_abs_error = match compute(sample, &case.quantity, case.tau) {
                Ok(v) if v.len() == case.expected.len() => v
                    .iter()
                    .zip(&case.expected)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
                _ => f64::INFINITY,
            };
            out.push(GoldenOutcome { label, max_abs_error });
        }
    }
    out
}

pub const GOLDEN_TOLERANCE: f64 = 1e-12;

/// Monte-Carlo integration of the true effects written independently of the
/// library: its own closed forms for the conditional functional, its own
/// generator, and antithetic pairs sharing draws across the three contrasts.
pub fn independent_mc_truth(config: &ScenarioConfig, scale: Scale, draws: usize, seed: u64) -> (f64, f64, f64) {
    use rand::{Rng, SeedableRng};
    let k = config.k;
    let b0 = (1.0 / k).ln();
    let ba = if config.direct_effect { (k / (k + 1.0)).ln() } else { 0.0 };
    let bm = if config.indirect_effect { ((k + 1.0) / k).ln() } else { 0.0 };
    let tau = config.tau;
    let lambda_d = config.competing.map_or(0.0, |c| c.lambda_d);
    let h = |rate: f64| match scale {
        Scale::SurvivalProb => (-rate * tau).exp(),
        Scale::Rmst => (1.0 - (-rate * tau).exp()) / rate,
        Scale::CumulativeIncidence(1) => rate / (rate + lambda_d) * (1.0 - (-(rate + lambda_d) * tau).exp()),
        Scale::CumulativeIncidence(_) => lambda_d / (rate + lambda_d) * (1.0 - (-(rate + lambda_d) * tau).exp()),
    };
    let (c0, c1) = (b0.exp(), (b0 + ba).exp());
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let (mut te, mut nde, mut nie) = (0.0, 0.0, 0.0);
    let pairs = draws / 2;
    for _ in 0..pairs {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        for z in [z, -z] {
            let e0 = (bm * (config.mu0 + z)).exp();
            let e1 = (bm * (config.mu1 + z)).exp();
            let (h11, h10, h00) = (h(c1 * e1), h(c1 * e0), h(c0 * e0));
            te += h11 - h00;
            nde += h10 - h00;
            nie += h11 - h10;
        }
    }
    let n = (2 * pairs) as f64;
    (te / n, nde / n, nie / n)
}
