//! Train the gradient-boosted quality learner on annotated samples and rank
//! the unannotated pool.
//!
//! cargo run --example quality_learner

use casf::learner::{
    build_features, build_targets, fit_gbdt_traced, predict_quality, GbdtParams, QualityRanking,
};
use casf::synth::{generate, synthetic_config, SynthParams};
use casf::text_metrics::build_metric_matrix;

pub fn run_example() -> casf::Result<(Vec<f64>, QualityRanking)> {
    let synth = generate(&SynthParams { n_samples: 60, ..SynthParams::default() }, 3)?;
    let d = &synth.dataset;
    let mm = build_metric_matrix(d, &synthetic_config().metric_set)?;

    // the first 30 samples play the annotated pool
    let pool: Vec<_> = d.samples()[..30]
        .iter()
        .map(|s| (s.sample_id.as_str(), s.human_scores.as_ref().expect("synthetic scores")))
        .collect();
    let targets = build_targets(&pool, d.aspects(), d.systems())?;
    let x: Vec<Vec<f64>> = (0..30).map(|i| build_features(&mm, i)).collect::<casf::Result<_>>()?;
    let y: Vec<f64> = pool.iter().map(|(id, _)| targets[*id]).collect();

    let (model, trace) = fit_gbdt_traced(&x, &y, &GbdtParams::default())?;
    let rest: Vec<(String, Vec<f64>)> = (30..d.len())
        .map(|i| Ok((d.samples()[i].sample_id.clone(), build_features(&mm, i)?)))
        .collect::<casf::Result<_>>()?;
    Ok((trace.train_mse, predict_quality(&model, &rest)?))
}

fn main() -> casf::Result<()> {
    let (mse, ranking) = run_example()?;
    println!(
        "training mse: before boosting {:.4}, after the last tree {:.4}",
        mse[0],
        mse[mse.len() - 1]
    );
    for r in ranking.ranked().iter().take(5) {
        println!("{} {:+.3}", r.sample_id, r.score);
    }
    Ok(())
}
