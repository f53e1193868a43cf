//! CASF against random sampling on synthetic datasets.
//!
//! cargo run --release --example synthetic_benchmark -- [generator_seeds] [random_seeds]
//!
//! Generator parameters can be overridden with a JSON object in
//! `CASF_SYNTH`, e.g. `CASF_SYNTH='{"human_noise": 0.3}'`.

use casf::engine::{run_simulation, subset_size};
use casf::evaluation::{random_subset, subset_tau, TauB};
use casf::synth::{generate, synthetic_config, SynthParams};
use casf::text_metrics::build_metric_matrix;

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn mean_tau(d: &casf::Dataset, subset: &[String]) -> f64 {
    let taus: Vec<f64> = d
        .aspects()
        .iter()
        .filter_map(|a| match subset_tau(d, subset, a).unwrap() {
            TauB::Value(v) => Some(v),
            TauB::Undefined => None,
        })
        .collect();
    taus.iter().sum::<f64>() / taus.len() as f64
}

fn params_from_env() -> casf::Result<SynthParams> {
    Ok(match std::env::var("CASF_SYNTH") {
        Ok(overrides) => {
            let mut base = serde_json::to_value(SynthParams::default())?;
            let patch: serde_json::Value = serde_json::from_str(&overrides)?;
            for (k, v) in patch.as_object().expect("CASF_SYNTH must be a JSON object") {
                base[k] = v.clone();
            }
            serde_json::from_value(base)?
        }
        Err(_) => SynthParams::default(),
    })
}

/// Pearson correlation of each configured metric with latent quality on
/// generator seed 0.
pub fn metric_correlations(params: &SynthParams) -> casf::Result<Vec<(String, f64)>> {
    let config = synthetic_config();
    let probe = generate(params, 0)?;
    let mm = build_metric_matrix(&probe.dataset, &config.metric_set)?;
    let quality: Vec<f64> = probe.quality.iter().flatten().copied().collect();
    Ok(config
        .metric_set
        .iter()
        .enumerate()
        .map(|(m, spec)| {
            let values: Vec<f64> = (0..mm.n_samples())
                .flat_map(|i| (0..mm.systems.len()).map(move |j| (i, j)))
                .map(|(i, j)| mm.get(i, j, m))
                .collect();
            (spec.name.clone(), pearson(&values, &quality))
        })
        .collect())
}

/// Per generator seed: CASF tau and mean random tau, each averaged over
/// aspects.
pub fn benchmark(params: &SynthParams, gen_seeds: u64, rand_seeds: u64) -> casf::Result<Vec<(f64, f64)>> {
    let config = synthetic_config();
    (0..gen_seeds)
        .map(|seed| {
            let d = generate(params, seed)?.dataset;
            let casf = mean_tau(&d, &run_simulation(&d, config.clone())?.final_subset);
            let k = subset_size(d.len(), config.rate);
            let random = (0..rand_seeds)
                .map(|s| mean_tau(&d, &random_subset(&d, k, s)))
                .sum::<f64>()
                / rand_seeds as f64;
            Ok((casf, random))
        })
        .collect()
}

pub fn run_example() -> casf::Result<Vec<(f64, f64)>> {
    benchmark(&SynthParams::default(), 2, 10)
}

fn main() -> casf::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let gen_seeds = args.next().unwrap_or(10);
    let rand_seeds = args.next().unwrap_or(100);
    let params = params_from_env()?;
    for (name, r) in metric_correlations(&params)? {
        println!("corr({name}, quality) = {r:.3}");
    }
    let runs = benchmark(&params, gen_seeds, rand_seeds)?;
    for (seed, (casf, random)) in runs.iter().enumerate() {
        println!("seed {seed:3}: casf {casf:.3} random {random:.3}");
    }
    let n = runs.len() as f64;
    let casf = runs.iter().map(|r| r.0).sum::<f64>() / n;
    let random = runs.iter().map(|r| r.1).sum::<f64>() / n;
    println!("mean tau: casf {casf:.4} random {random:.4} margin {:+.4}", casf - random);
    Ok(())
}
