//! Shared inputs for the criterion benches in `benches/`.

use std::path::PathBuf;

use cosmic_bell::bellstats::{predictability, setting_probabilities, TableInput, TrialModel};
use cosmic_bell::simulate::{simulate_run, SimulationConfig};
use cosmic_bell::timetag::SiteStreams;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Trial model of the first published run.
pub fn run1_model() -> TrialModel {
    let t = TableInput::load(fixtures().join("run1/tables.json")).expect("run-1 tables");
    let probs = setting_probabilities(&t.coincidences).expect("marginals");
    TrialModel::new(&probs, &predictability(&t.rates).expect("predictability")).expect("model")
}

/// Simulated streams with roughly `pairs` entangled pairs.
pub fn streams(pairs: f64, seed: u64) -> (SimulationConfig, SiteStreams) {
    let cfg = SimulationConfig {
        seed,
        duration_s: pairs / 2.5e5,
        pair_rate_hz: 2.5e5,
        jitter_ps: 300.0,
        block_s: 0.05,
        ..SimulationConfig::default()
    };
    let run = simulate_run(&cfg).expect("simulation");
    (cfg, run.streams)
}
