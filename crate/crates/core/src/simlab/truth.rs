//! True mediation estimands for the simulation model.
//!
//! Conditional on arm `a` and mediator `m`, the event time is exponential with
//! rate `lambda(a, m)`, so survival, RMST and cause-specific cumulative
//! incidence at `tau` have closed forms. The natural effects are then
//! expectations of those closed forms over `M ~ N(mu_a, 1)`:
//!
//! - `TE  = E[h(1, M1)] - E[h(0, M0)]`
//! - `NDE = E[h(1, M0)] - E[h(0, M0)]`
//! - `NIE = E[h(1, M1)] - E[h(1, M0)]`
//!
//! computed by Gauss-Hermite quadrature, with a Monte-Carlo integrator as an
//! independent check.

use super::scenario::ScenarioConfig;
use super::seeds::{derive_seed, stream_rng};
use crate::error::{Error, Result};
use crate::pseudo::{EstimandKind, Scale};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub const DEFAULT_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruthMethod {
    GaussHermite(usize),
    /// The functional does not depend on the mediator.
    ClosedForm,
    MonteCarlo(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueEffects {
    pub te: f64,
    pub nde: f64,
    pub nie: f64,
    pub scale: EstimandKind,
    pub method: TruthMethod,
}

/// Gauss-Hermite rule for `int exp(-x^2) f(x) dx`: nodes in ascending order
/// and weights summing to `sqrt(pi)`.
///
/// Newton iteration on the orthonormal Hermite recurrence, seeded with the
/// usual asymptotic guesses for the largest roots.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one node");
    const PI_M4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    const MAX_ITER: usize = 100;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let half = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..MAX_ITER {
            let mut p1 = PI_M4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

/// Conditional functional `h(a, m)` of the exponential model at `tau`.
pub fn conditional_functional(config: &ScenarioConfig, scale: Scale, arm: u8, mediator: f64) -> Result<f64> {
    let lambda = config.event_rate(arm, mediator);
    let tau = config.tau;
    Ok(match scale {
        Scale::SurvivalProb => (-lambda * tau).exp(),
        Scale::Rmst => -(-lambda * tau).exp_m1() / lambda,
        Scale::CumulativeIncidence(cause) => {
            let lambda_d = config
                .competing
                .ok_or_else(|| Error::Config("cumulative-incidence truth needs a [competing] section".into()))?
                .lambda_d;
            let total = lambda + lambda_d;
            let cause_rate = match cause {
                1 => lambda,
                2 => lambda_d,
                _ => return Err(Error::UnknownCause { cause, max_cause: 2 }),
            };
            cause_rate / total * -(-total * tau).exp_m1()
        }
    })
}

/// Truths with the default 64-node rule.
pub fn true_effects(config: &ScenarioConfig, scale: Scale) -> Result<TrueEffects> {
    true_effects_with_nodes(config, scale, DEFAULT_NODES)
}

pub fn true_effects_with_nodes(config: &ScenarioConfig, scale: Scale, nodes: usize) -> Result<TrueEffects> {
    config.validate()?;
    let estimand = EstimandKind::new(scale, config.tau)?;
    let h = |a: u8, m: f64| conditional_functional(config, scale, a, m);

    if !config.indirect_effect {
        // h does not depend on M; the mediator distribution integrates out.
        let nde = h(1, 0.0)? - h(0, 0.0)?;
        return Ok(TrueEffects {
            te: nde,
            nde,
            nie: 0.0,
            scale: estimand,
            method: TruthMethod::ClosedForm,
        });
    }

    let (x, w) = gauss_hermite(nodes);
    let norm = std::f64::consts::PI.sqrt();
    let expect = |a: u8, mu: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            acc += wi / norm * h(a, mu + std::f64::consts::SQRT_2 * xi)?;
        }
        Ok(acc)
    };
    let e11 = expect(1, config.mu1)?;
    let e10 = expect(1, config.mu0)?;
    let e00 = expect(0, config.mu0)?;
    Ok(TrueEffects {
        te: e11 - e00,
        nde: e10 - e00,
        nie: e11 - e10,
        scale: estimand,
        method: TruthMethod::GaussHermite(nodes),
    })
}

/// Monte-Carlo integration of the same contrasts over `draws` standard normal
/// draws (antithetic pairs, common draws across contrasts).
pub fn monte_carlo_effects(config: &ScenarioConfig, scale: Scale, draws: usize, seed: u64) -> Result<TrueEffects> {
    config.validate()?;
    let estimand = EstimandKind::new(scale, config.tau)?;
    // Validate the scale once so the parallel loop cannot fail.
    conditional_functional(config, scale, 0, 0.0)?;
    const CHUNK: usize = 1 << 16;
    let pairs = draws.div_ceil(2);
    let chunks = pairs.div_ceil(CHUNK);
    let h = |a: u8, m: f64| conditional_functional(config, scale, a, m).expect("validated scale");
    let partial: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(derive_seed(seed, 0, c as u64), 0);
            let len = CHUNK.min(pairs - c * CHUNK);
            let mut acc = (0.0, 0.0, 0.0);
            for _ in 0..len {
                let z: f64 = rng.sample(StandardNormal);
                for z in [z, -z] {
                    let h11 = h(1, config.mu1 + z);
                    let h10 = h(1, config.mu0 + z);
                    let h00 = h(0, config.mu0 + z);
                    acc.0 += h11 - h00;
                    acc.1 += h10 - h00;
                    acc.2 += h11 - h10;
                }
            }
            acc
        })
        .collect();
    // Sequential fold keeps the result independent of the thread schedule.
    let (s_te, s_nde, s_nie) = partial
        .iter()
        .fold((0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let total = (2 * pairs) as f64;
    Ok(TrueEffects {
        te: s_te / total,
        nde: s_nde / total,
        nie: s_nie / total,
        scale: estimand,
        method: TruthMethod::MonteCarlo(2 * pairs),
    })
}
