mod common;

use pseudomed::prelude::*;
use pseudomed::simlab::opchar::{grid, run_operating_characteristics, OpCharOptions, DEFAULT_LAMBDA_D};
use pseudomed::simlab::{monte_carlo_effects, true_effects_with_nodes};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

const SCALES: [Scale; 3] = [Scale::SurvivalProb, Scale::Rmst, Scale::CumulativeIncidence(1)];
const TAUS: [f64; 3] = [2.0, 3.0, 4.0];

fn config(case: EffectCase, scale: Scale, tau: f64) -> ScenarioConfig {
    let c = ScenarioConfig::new(100, case, tau);
    match scale {
        Scale::CumulativeIncidence(_) => c.with_competing(DEFAULT_LAMBDA_D),
        _ => c,
    }
}

fn all_configs() -> Vec<(ScenarioConfig, Scale)> {
    let mut out = Vec::new();
    for case in EffectCase::ALL {
        for scale in SCALES {
            for tau in TAUS {
                out.push((config(case, scale, tau), scale));
            }
        }
    }
    out
}

#[test]
fn null_censoring_fraction_matches_target() {
    let s = simulate_trial(&ScenarioConfig::new(50_000, EffectCase::NoEffect, 2.0).with_seed(1)).unwrap();
    let censored = s.status().iter().filter(|&&d| d == 0).count() as f64 / s.len() as f64;
    assert!((censored - 0.2).abs() <= 0.02, "{censored}");
}

#[test]
fn control_arm_mean_event_time_matches_oracle() {
    let config = ScenarioConfig::new(1_000_000, EffectCase::Both, 2.0).with_seed(2);
    let latent = pseudomed::simlab::simulate_latent(&config).unwrap();
    let control: Vec<f64> = latent
        .event_time
        .iter()
        .zip(&latent.arm)
        .filter(|(_, &a)| a == 0)
        .map(|(&t, _)| t)
        .collect();
    let empirical = control.iter().sum::<f64>() / control.len() as f64;

    // Independent oracle: E[T | A = 0] = E[1 / rate(0, M)] with M ~ N(0, 1),
    // integrated with a different generator and 10^7 draws.
    let beta_m = (4.0f64 / 3.0).ln();
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let draws = 10_000_000;
    let oracle = (0..draws)
        .map(|_| 3.0 * (-beta_m * rng.sample::<f64, _>(StandardNormal)).exp())
        .sum::<f64>()
        / draws as f64;
    let closed_form = 3.0 * ((3.0f64 / 4.0).ln().powi(2) / 2.0).exp();
    assert!((oracle - closed_form).abs() < 2e-3, "{oracle} vs {closed_form}");
    assert!((closed_form - 3.1268).abs() < 1e-4);
    assert!((empirical - oracle).abs() < 0.02, "{empirical} vs {oracle}");
}

#[test]
fn competing_cause_one_fraction_matches_closed_form() {
    let tau = 2.0;
    let lambda_d = 0.2;
    let config = ScenarioConfig::new(100_000, EffectCase::NoEffect, tau)
        .with_censoring(0.0)
        .with_competing(lambda_d)
        .with_seed(3);
    let s = simulate_competing(&config).unwrap();
    let hits = s
        .times()
        .iter()
        .zip(s.status())
        .filter(|(&t, &d)| d == 1 && t <= tau)
        .count() as f64
        / s.len() as f64;
    let lambda_t = 1.0 / 3.0;
    let total = lambda_t + lambda_d;
    let expected = lambda_t / total * (1.0 - (-total * tau).exp());
    assert!((hits - expected).abs() < 0.006, "{hits} vs {expected}");
    assert!(s.status().iter().all(|&d| d != 0));
}

#[test]
fn truths_are_additive() {
    for (c, scale) in all_configs() {
        let t = true_effects(&c, scale).unwrap();
        assert!((t.te - (t.nde + t.nie)).abs() <= 1e-10, "{c:?} {scale:?}");
    }
}

#[test]
fn quadrature_has_converged_at_32_nodes() {
    for (c, scale) in all_configs() {
        let a = true_effects_with_nodes(&c, scale, 32).unwrap();
        let b = true_effects_with_nodes(&c, scale, 64).unwrap();
        for (x, y) in [(a.te, b.te), (a.nde, b.nde), (a.nie, b.nie)] {
            assert!((x - y).abs() <= 1e-10, "{c:?} {scale:?}: {x} vs {y}");
        }
    }
}

#[test]
fn quadrature_agrees_with_independent_monte_carlo() {
    // The full grid is covered by the acceptance run; here the both-effects
    // configurations, where the mediator integral is nontrivial.
    for (i, (c, scale)) in all_configs().into_iter().filter(|(c, _)| c.case() == EffectCase::Both).enumerate() {
        let gh = true_effects(&c, scale).unwrap();
        let (te, nde, nie) = common::independent_mc_truth(&c, scale, 10_000_000, 500 + i as u64);
        for (x, y) in [(gh.te, te), (gh.nde, nde), (gh.nie, nie)] {
            assert!((x - y).abs() <= 1e-4, "{c:?} {scale:?}: {x} vs {y}");
        }
    }
}

#[test]
fn library_monte_carlo_matches_quadrature() {
    let c = config(EffectCase::Both, Scale::Rmst, 3.0);
    let gh = true_effects(&c, Scale::Rmst).unwrap();
    let mc = monte_carlo_effects(&c, Scale::Rmst, 2_000_000, 4).unwrap();
    assert!((gh.nie - mc.nie).abs() <= 1e-4 && (gh.te - mc.te).abs() <= 1e-4);
    assert_eq!(mc, monte_carlo_effects(&c, Scale::Rmst, 2_000_000, 4).unwrap());
}

#[test]
fn effect_directions() {
    for tau in TAUS {
        for scale in SCALES {
            let t = true_effects(&config(EffectCase::Both, scale, tau), scale).unwrap();
            match scale {
                Scale::CumulativeIncidence(_) => assert!(t.te < 0.0, "{scale:?} tau {tau}"),
                _ => assert!(t.te > 0.0, "{scale:?} tau {tau}"),
            }
        }
    }
}

#[test]
fn both_effects_cell_is_unbiased() {
    let cells = grid(&[EffectCase::Both], &[Scale::SurvivalProb], &[2.0], &[200], DEFAULT_LAMBDA_D);
    let opts = OpCharOptions { replicates: 2000, master_seed: 5, ..Default::default() };
    let r = &run_operating_characteristics(&cells, &opts).unwrap()[0];
    assert_eq!(r.completed, 2000);
    for s in [&r.nde, &r.nie, &r.te] {
        assert!(s.bias.abs() <= 0.01, "{s:?}");
    }
}

#[test]
fn null_cell_type_one_error() {
    let cells = grid(&[EffectCase::NoEffect], &[Scale::SurvivalProb], &[2.0], &[100], DEFAULT_LAMBDA_D);
    let opts = OpCharOptions { replicates: 2000, master_seed: 6, ..Default::default() };
    let r = &run_operating_characteristics(&cells, &opts).unwrap()[0];
    assert!(r.te.is_null && r.nde.is_null && r.nie.is_null);
    assert!((r.te.rejection_rate - 0.05).abs() <= 0.012, "{}", r.te.rejection_rate);
}

#[test]
fn replicate_failures_are_counted() {
    // Two subjects per arm and a late horizon: many replicates lack follow-up.
    let cells = grid(&[EffectCase::Both], &[Scale::SurvivalProb], &[4.0], &[2], DEFAULT_LAMBDA_D);
    let opts = OpCharOptions { replicates: 200, ..Default::default() };
    let r = &run_operating_characteristics(&cells, &opts).unwrap()[0];
    assert!(r.failures > 0);
    assert_eq!(r.completed + r.failures, 200);
    assert_eq!(r.te.p_values.len(), r.completed);
}

#[test]
fn opchar_results_do_not_depend_on_thread_count() {
    let cells = grid(&[EffectCase::IndirectOnly], &[Scale::Rmst, Scale::CumulativeIncidence(1)], &[3.0], &[50], DEFAULT_LAMBDA_D);
    let opts = OpCharOptions { replicates: 100, master_seed: 8, ..Default::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_operating_characteristics(&cells, &opts).unwrap())
    };
    assert_eq!(run(1), run(3));
}
