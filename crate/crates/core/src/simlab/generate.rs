use super::scenario::ScenarioConfig;
use super::seeds::stream_rng;
use crate::error::{Error, Result};
use crate::survival::SurvivalSample;
use rand::Rng;
use rand_distr::StandardNormal;

// Each latent variable has its own random stream, so the competing-risks
// generator shares mediator, event and censoring draws with the plain one.
const STREAM_MEDIATOR: u64 = 0;
const STREAM_EVENT: u64 = 1;
const STREAM_CENSOR: u64 = 2;
const STREAM_COMPETING: u64 = 3;

/// Unobserved per-subject quantities behind a simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTrial {
    pub arm: Vec<u8>,
    pub mediator: Vec<f64>,
    pub event_time: Vec<f64>,
    pub censor_time: Vec<f64>,
    /// Competing-event times; `None` without a competing configuration.
    pub competing_time: Option<Vec<f64>>,
}

/// Inverse-CDF exponential draw; `rate == 0` gives `+inf`.
fn exponential<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    if rate == 0.0 {
        f64::INFINITY
    } else {
        -(-u).ln_1p() / rate
    }
}

/// Draws arms (alternating 0, 1, 0, 1, ...), mediators and latent times.
pub fn simulate_latent(config: &ScenarioConfig) -> Result<LatentTrial> {
    config.validate()?;
    let n = 2 * config.n_per_arm;
    let mut rng_m = stream_rng(config.seed, STREAM_MEDIATOR);
    let mut rng_t = stream_rng(config.seed, STREAM_EVENT);
    let mut rng_c = stream_rng(config.seed, STREAM_CENSOR);
    let lambda_c = config.lambda_c();

    let arm: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let mediator: Vec<f64> = arm
        .iter()
        .map(|&a| config.mediator_mean(a) + rng_m.sample::<f64, _>(StandardNormal))
        .collect();
    let event_time = arm
        .iter()
        .zip(&mediator)
        .map(|(&a, &m)| exponential(&mut rng_t, config.event_rate(a, m)))
        .collect();
    let censor_time = (0..n).map(|_| exponential(&mut rng_c, lambda_c)).collect();
    let competing_time = config.competing.map(|c| {
        let mut rng_d = stream_rng(config.seed, STREAM_COMPETING);
        (0..n).map(|_| exponential(&mut rng_d, c.lambda_d)).collect()
    });

    Ok(LatentTrial {
        arm,
        mediator,
        event_time,
        censor_time,
        competing_time,
    })
}

/// Single-event trial: `U = min(T, C)`, status `1` when `T <= C`.
pub fn simulate_trial(config: &ScenarioConfig) -> Result<SurvivalSample> {
    let latent = simulate_latent(&ScenarioConfig { competing: None, ..*config })?;
    let (times, status) = latent
        .event_time
        .iter()
        .zip(&latent.censor_time)
        .map(|(&t, &c)| if t <= c { (t, 1) } else { (c, 0) })
        .unzip();
    build(times, status, latent.arm, latent.mediator, 1)
}

/// Competing-risks trial: `U = min(C, T, D)` with status 0 (censored),
/// 1 (event of interest) or 2 (competing event).
pub fn simulate_competing(config: &ScenarioConfig) -> Result<SurvivalSample> {
    if config.competing.is_none() {
        return Err(Error::Config("competing-risks simulation needs a [competing] section".into()));
    }
    let latent = simulate_latent(config)?;
    let d = latent.competing_time.as_ref().expect("competing times drawn");
    let (times, status) = (0..latent.arm.len())
        .map(|i| {
            let (t, c, d) = (latent.event_time[i], latent.censor_time[i], d[i]);
            if t <= c && t <= d {
                (t, 1)
            } else if d < t && d <= c {
                (d, 2)
            } else {
                (c, 0)
            }
        })
        .unzip();
    build(times, status, latent.arm, latent.mediator, 2)
}

fn build(times: Vec<f64>, status: Vec<u32>, arm: Vec<u8>, mediator: Vec<f64>, causes: u32) -> Result<SurvivalSample> {
    SurvivalSample::new(times, status, arm, mediator)?.with_num_causes(causes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simlab::scenario::EffectCase;

    #[test]
    fn alternating_arms_and_size() {
        let c = ScenarioConfig::new(5, EffectCase::Both, 2.0).with_seed(1);
        let s = simulate_trial(&c).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.arm(), &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn reproducible_from_seed() {
        let c = ScenarioConfig::new(50, EffectCase::Both, 2.0).with_seed(42);
        assert_eq!(simulate_trial(&c).unwrap(), simulate_trial(&c).unwrap());
        let c2 = c.with_competing(0.2);
        assert_eq!(simulate_competing(&c2).unwrap(), simulate_competing(&c2).unwrap());
        assert_ne!(simulate_trial(&c).unwrap(), simulate_trial(&c.with_seed(43)).unwrap());
    }

    #[test]
    fn competing_requires_config() {
        let c = ScenarioConfig::new(5, EffectCase::Both, 2.0);
        assert!(matches!(simulate_competing(&c), Err(Error::Config(_))));
    }

    #[test]
    fn vanishing_competing_hazard_recovers_plain_trial() {
        let c = ScenarioConfig::new(200, EffectCase::Both, 2.0).with_seed(9);
        let plain = simulate_trial(&c).unwrap();
        let comp = simulate_competing(&c.with_competing(1e-300)).unwrap();
        assert_eq!(plain.times(), comp.times());
        assert_eq!(plain.status(), comp.status());
        assert_eq!(plain.mediator(), comp.mediator());
    }

    #[test]
    fn no_censoring_when_pi_c_zero() {
        let c = ScenarioConfig::new(100, EffectCase::NoEffect, 2.0).with_censoring(0.0).with_seed(3);
        let s = simulate_trial(&c).unwrap();
        assert!(s.status().iter().all(|&d| d == 1));
    }
}
