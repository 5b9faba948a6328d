use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which of the direct and indirect paths are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectCase {
    NoEffect,
    DirectOnly,
    IndirectOnly,
    Both,
}

impl EffectCase {
    pub const ALL: [EffectCase; 4] = [
        EffectCase::NoEffect,
        EffectCase::DirectOnly,
        EffectCase::IndirectOnly,
        EffectCase::Both,
    ];

    pub fn flags(self) -> (bool, bool) {
        match self {
            EffectCase::NoEffect => (false, false),
            EffectCase::DirectOnly => (true, false),
            EffectCase::IndirectOnly => (false, true),
            EffectCase::Both => (true, true),
        }
    }

    pub fn from_flags(direct: bool, indirect: bool) -> Self {
        match (direct, indirect) {
            (false, false) => EffectCase::NoEffect,
            (true, false) => EffectCase::DirectOnly,
            (false, true) => EffectCase::IndirectOnly,
            (true, true) => EffectCase::Both,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EffectCase::NoEffect => "no_effect",
            EffectCase::DirectOnly => "direct_only",
            EffectCase::IndirectOnly => "indirect_only",
            EffectCase::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetingConfig {
    /// Constant hazard of the competing event.
    pub lambda_d: f64,
}

/// Two-arm trial with a normal mediator and exponential event times.
///
/// `M | A = a ~ N(mu_a, 1)`, event rate `exp(beta0 + A beta_A + M beta_M)`,
/// independent exponential censoring targeting fraction `pi_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_per_arm: usize,
    #[serde(default = "default_k")]
    pub k: f64,
    pub direct_effect: bool,
    pub indirect_effect: bool,
    #[serde(default)]
    pub mu0: f64,
    #[serde(default = "default_mu1")]
    pub mu1: f64,
    #[serde(default = "default_pi_c")]
    pub pi_c: f64,
    pub tau: f64,
    #[serde(default)]
    pub competing: Option<CompetingConfig>,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> f64 {
    3.0
}

fn default_mu1() -> f64 {
    -1.0
}

fn default_pi_c() -> f64 {
    0.2
}

impl ScenarioConfig {
    /// Defaults `k = 3`, `mu0 = 0`, `mu1 = -1`, `pi_c = 0.2`.
    pub fn new(n_per_arm: usize, case: EffectCase, tau: f64) -> Self {
        let (direct_effect, indirect_effect) = case.flags();
        Self {
            n_per_arm,
            k: default_k(),
            direct_effect,
            indirect_effect,
            mu0: 0.0,
            mu1: default_mu1(),
            pi_c: default_pi_c(),
            tau,
            competing: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_competing(mut self, lambda_d: f64) -> Self {
        self.competing = Some(CompetingConfig { lambda_d });
        self
    }

    pub fn with_censoring(mut self, pi_c: f64) -> Self {
        self.pi_c = pi_c;
        self
    }

    pub fn case(&self) -> EffectCase {
        EffectCase::from_flags(self.direct_effect, self.indirect_effect)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_arm == 0 {
            return Err(Error::Config("n_per_arm must be positive".into()));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        if !(self.pi_c >= 0.0 && self.pi_c < 1.0) {
            return Err(Error::Config(format!("pi_c must lie in [0, 1), got {}", self.pi_c)));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.mu0.is_finite() && self.mu1.is_finite()) {
            return Err(Error::Config("mediator means must be finite".into()));
        }
        if let Some(c) = self.competing {
            if !(c.lambda_d.is_finite() && c.lambda_d > 0.0) {
                return Err(Error::Config(format!("lambda_d must be positive, got {}", c.lambda_d)));
            }
        }
        Ok(())
    }

    /// `ln(1/k)`: baseline log-rate, giving mean event time `k` without effects.
    pub fn beta0(&self) -> f64 {
        (1.0 / self.k).ln()
    }

    pub fn beta_a(&self) -> f64 {
        if self.direct_effect {
            (self.k / (self.k + 1.0)).ln()
        } else {
            0.0
        }
    }

    pub fn beta_m(&self) -> f64 {
        if self.indirect_effect {
            ((self.k + 1.0) / self.k).ln()
        } else {
            0.0
        }
    }

    /// Common event rate used to calibrate censoring.
    pub fn lambda0(&self) -> f64 {
        let k = self.k;
        match self.case() {
            EffectCase::NoEffect => 1.0 / k,
            EffectCase::DirectOnly | EffectCase::IndirectOnly => 1.0 / (k + 1.0),
            EffectCase::Both => k / (k + 1.0).powi(2),
        }
    }

    pub fn lambda_c(&self) -> f64 {
        self.pi_c / (1.0 - self.pi_c) * self.lambda0()
    }

    /// Event hazard for arm `a` and mediator value `m`.
    pub fn event_rate(&self, arm: u8, mediator: f64) -> f64 {
        (self.beta0() + f64::from(arm) * self.beta_a() + mediator * self.beta_m()).exp()
    }

    pub fn mediator_mean(&self, arm: u8) -> f64 {
        if arm == 0 {
            self.mu0
        } else {
            self.mu1
        }
    }
}
