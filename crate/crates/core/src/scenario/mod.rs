//! JSON scenario configs, their runners, and the reports they produce.

mod config;
mod report;
mod run_channels;
mod run_scheme2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{
    AdversaryConfig, ChannelConfig, InputConfig, LoadedScenario, MatrixLiteral, ScenarioConfig, ScenarioKind,
    StateLiteral, TamperConfig,
};
pub use report::{bit_histogram, Criterion, Report, ScenarioOutput};

use crate::error::Result;
use crate::protocol::Mode;
use crate::qmat::DensityMatrix;

/// Catalog of built-in scenarios, one per line.
pub fn list_scenarios() -> String {
    ScenarioKind::ALL
        .iter()
        .map(|k| format!("{:<11} {}\n", k.name(), k.description()))
        .collect()
}

pub fn run_scenario(loaded: &LoadedScenario) -> Result<ScenarioOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(loaded.config.seed);
    match loaded.config.scenario {
        ScenarioKind::ChoiDemo => run_channels::choi_demo(loaded, &mut rng),
        ScenarioKind::Scheme1 => run_channels::scheme1(loaded, &mut rng),
        ScenarioKind::Experiment => run_channels::experiment(loaded, &mut rng),
        ScenarioKind::Scheme2 => run_scheme2::scheme2(loaded, &mut rng),
        ScenarioKind::Reusable => run_scheme2::reusable(loaded, &mut rng),
        ScenarioKind::Hybrids => run_scheme2::hybrids(loaded, &mut rng),
        ScenarioKind::Qcp => run_scheme2::qcp(loaded, &mut rng),
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::Sampled => "sampled",
    }
}

/// Computational-basis distribution of a state.
fn diagonal(rho: &DensityMatrix) -> Vec<f64> {
    (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect()
}

/// `½ Σ_o 3σ_o` with binomial `σ_o` at `n` samples: the trace distance an
/// empirical mixture of exact branch states may sit from its mean at 3σ.
fn three_sigma_bound(p: &[f64], n: usize) -> f64 {
    let n = n.max(1) as f64;
    0.5 * p.iter().map(|&p| 3.0 * (p * (1.0 - p) / n).sqrt()).sum::<f64>()
}
