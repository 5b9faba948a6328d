//! Simulation laboratory: the two-arm exponential trial generator, truth
//! oracles for the natural effects, and an operating-characteristics runner.

pub mod bench;
pub mod generate;
pub mod opchar;
pub mod scenario;
pub mod seeds;
pub mod stats;
pub mod truth;

pub use bench::{bench_pseudo, BenchRow};
pub use generate::{simulate_competing, simulate_latent, simulate_trial, LatentTrial};
pub use opchar::{
    default_grid, grid, run_operating_characteristics, CellResult, EffectSummary, GridCell, OpCharOptions,
};
pub use scenario::{CompetingConfig, EffectCase, ScenarioConfig};
pub use truth::{gauss_hermite, monte_carlo_effects, true_effects, true_effects_with_nodes, TrueEffects, TruthMethod};
