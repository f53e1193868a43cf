//! Full offline comparison on a synthetic dataset: CASF with the simulated
//! oracle against seeded random and length-heuristic baselines.
//!
//! cargo run --release --example simulate_casf

use casf::cli::simulate;
use casf::evaluation::RankingReport;
use casf::synth::{generate, synthetic_config, SynthParams};
use casf::RunConfig;

pub fn run_example() -> casf::Result<RankingReport> {
    let d = generate(&SynthParams::default(), 11)?.dataset;
    let engine = synthetic_config();
    let config = RunConfig {
        metric_set: engine.metric_set.iter().map(|m| m.name.clone()).collect(),
        preliminary_metric: Some(engine.preliminary_metric),
        seeds: vec![1, 2, 3],
        ..RunConfig::default()
    };
    Ok(simulate(&d, &config, "synthetic")?.report)
}

fn main() -> casf::Result<()> {
    print!("{}", run_example()?.to_markdown());
    Ok(())
}
