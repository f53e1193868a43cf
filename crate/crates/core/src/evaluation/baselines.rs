//! Comparison subsets: seeded random sampling, length-stratified heuristic
//! sampling, and single-phase or controller-free variants of the engine.
//!
//! Every seeded method draws from `ChaCha8Rng::seed_from_u64(seed)` and uses
//! a partial Fisher-Yates shuffle to sample without replacement.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{subset_tau, TauB};
use crate::controller::initials;
use crate::dataset::Dataset;
use crate::engine::{subset_size, Engine, EngineConfig, OracleKind, SelectionRule};
use crate::error::{Error, Result};
use crate::learner::{preliminary_quality, QualityRanking};
use crate::sampler::make_buckets;
use crate::text_metrics::{build_metric_matrix, tokenize, MetricSpec};

fn draw(rng: &mut ChaCha8Rng, pool: &[usize], k: usize) -> Vec<usize> {
    let mut pool = pool.to_vec();
    let (chosen, _) = pool.partial_shuffle(rng, k);
    chosen.to_vec()
}

fn ids(d: &Dataset, mut indices: Vec<usize>) -> Vec<String> {
    indices.sort_unstable();
    indices
        .into_iter()
        .map(|i| d.samples()[i].sample_id.clone())
        .collect()
}

/// Uniform sample of `k` ids without replacement, in dataset order.
pub fn random_subset(d: &Dataset, k: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..d.len()).collect();
    ids(d, draw(&mut rng, &all, k.min(d.len())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomRun {
    pub seed: u64,
    pub subset: Vec<String>,
    pub taus: BTreeMap<String, TauB>,
}

pub fn random_baseline(d: &Dataset, rate: f64, seeds: &[u64]) -> Result<Vec<RandomRun>> {
    let k = subset_size(d.len(), rate);
    if k == 0 {
        return Err(Error::InvalidInput(format!("rate {rate} selects no samples")));
    }
    seeds
        .iter()
        .map(|&seed| {
            let subset = random_subset(d, k, seed);
            let taus = d
                .aspects()
                .iter()
                .map(|a| Ok((a.clone(), subset_tau(d, &subset, a)?)))
                .collect::<Result<_>>()?;
            Ok(RandomRun { seed, subset, taus })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSubset {
    pub seed: u64,
    pub subset: Vec<String>,
    /// Set when a decile held fewer samples than its quota and the tail was
    /// widened to the nearest ranks.
    pub fallback: bool,
}

/// Length-stratified sampling: samples are ordered by the mean token count
/// of their outputs; `ceil(0.1 k)` ids come from each extreme decile and the
/// remainder from the middle 80%. A decile smaller than its quota is
/// widened towards the middle.
pub fn heuristic_baseline(d: &Dataset, rate: f64, seed: u64) -> Result<HeuristicSubset> {
    let n = d.len();
    let k = subset_size(n, rate);
    if k == 0 {
        return Err(Error::InvalidInput(format!("rate {rate} selects no samples")));
    }
    let lengths: Vec<f64> = d
        .samples()
        .iter()
        .map(|s| {
            let total: usize = d.systems().iter().map(|sys| tokenize(s.output(sys)).len()).sum();
            total as f64 / d.systems().len() as f64
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lengths[a].total_cmp(&lengths[b]).then(a.cmp(&b)));

    let per_tail = k.div_ceil(10);
    let tail = (n / 10).max(per_tail).min(n / 2);
    let bottom = &order[..tail];
    let top = &order[n - tail..];
    let middle = &order[tail..n - tail];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let from_tail = per_tail.min(tail);
    let mut chosen = draw(&mut rng, bottom, from_tail);
    chosen.extend(draw(&mut rng, top, from_tail));
    let want_middle = k - 2 * from_tail;
    chosen.extend(draw(&mut rng, middle, want_middle.min(middle.len())));

    debug_assert_eq!(chosen.len(), k);
    Ok(HeuristicSubset {
        seed,
        subset: ids(d, chosen),
        fallback: tail > n / 10,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    /// One systematic pass over the mean of min-max normalized metrics.
    EightMetric,
    /// One systematic pass over the preliminary metric.
    SingleMetric,
    /// Full multi-phase run with every bucket taking its initial sample.
    Online,
}

pub fn ablation_subset(d: &Dataset, config: &EngineConfig, mode: AblationMode) -> Result<Vec<String>> {
    let k = subset_size(d.len(), config.rate);
    let single_pass = |ranking: QualityRanking| -> Result<Vec<String>> {
        Ok(initials(&make_buckets(&ranking, k)?))
    };
    match mode {
        AblationMode::EightMetric => {
            let mm = build_metric_matrix(d, &config.metric_set)?;
            let n_sys = mm.systems.len() as f64;
            let n_metrics = mm.metric_names.len();
            let mut quality = vec![0.0; mm.n_samples()];
            for m in 0..n_metrics {
                let per_sample: Vec<f64> = (0..mm.n_samples())
                    .map(|i| (0..mm.systems.len()).map(|j| mm.get(i, j, m)).sum::<f64>() / n_sys)
                    .collect();
                let lo = per_sample.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = per_sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for (q, v) in quality.iter_mut().zip(&per_sample) {
                    if hi > lo {
                        *q += (v - lo) / (hi - lo);
                    }
                }
            }
            let ranking = QualityRanking::from_scores(
                mm.sample_ids
                    .iter()
                    .cloned()
                    .zip(quality.into_iter().map(|q| q / n_metrics as f64)),
            );
            single_pass(ranking)
        }
        AblationMode::SingleMetric => {
            let mm = build_metric_matrix(d, &[MetricSpec::by_name(&config.preliminary_metric)])?;
            single_pass(preliminary_quality(&mm, &config.preliminary_metric)?)
        }
        AblationMode::Online => {
            let cfg = EngineConfig {
                selection: SelectionRule::InitialOnly,
                oracle: OracleKind::Simulated,
                ..config.clone()
            };
            Ok(Engine::new(d, cfg)?.run_simulation()?.final_subset)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;

    fn dataset(lengths: &[usize]) -> Dataset {
        let samples = lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                let text = vec!["w"; len].join(" ");
                Sample {
                    sample_id: format!("s{i:03}"),
                    source: String::new(),
                    references: vec![],
                    outputs: [("a".into(), text.clone()), ("b".into(), text)].into(),
                    human_scores: Some(
                        [
                            ("a".to_string(), [("q".to_string(), i as f64)].into()),
                            ("b".to_string(), [("q".to_string(), 0.5 * i as f64)].into()),
                        ]
                        .into(),
                    ),
                    external_metrics: None,
                }
            })
            .collect();
        Dataset::from_samples(samples).unwrap()
    }

    #[test]
    fn random_is_seeded() {
        let d = dataset(&[3; 40]);
        assert_eq!(random_subset(&d, 10, 7), random_subset(&d, 10, 7));
        assert_ne!(random_subset(&d, 10, 7), random_subset(&d, 10, 8));
        assert_eq!(random_subset(&d, 10, 7).len(), 10);
    }

    #[test]
    fn random_full_rate_is_everything() {
        let d = dataset(&[3; 12]);
        let runs = random_baseline(&d, 1.0, &[1, 2]).unwrap();
        for r in runs {
            assert_eq!(r.subset.len(), 12);
            assert_eq!(r.taus["q"], TauB::Value(1.0));
        }
    }

    #[test]
    fn heuristic_tail_quotas() {
        // lengths 1..=100 so the deciles are ids s000..s009 and s090..s099
        let lengths: Vec<usize> = (1..=100).collect();
        let d = dataset(&lengths);
        let h = heuristic_baseline(&d, 0.1, 3).unwrap();
        assert_eq!(h.subset.len(), 10);
        let idx: Vec<usize> = h.subset.iter().map(|s| s[1..].parse().unwrap()).collect();
        assert_eq!(idx.iter().filter(|&&i| i < 10).count(), 1);
        assert_eq!(idx.iter().filter(|&&i| i >= 90).count(), 1);
        assert_eq!(idx.iter().filter(|&&i| (10..90).contains(&i)).count(), 8);
        assert!(!h.fallback);
        assert_eq!(h, heuristic_baseline(&d, 0.1, 3).unwrap());
    }

    #[test]
    fn heuristic_fallback_fills_quota() {
        // decile of 1 sample, tail quota ceil(15 / 10) = 2
        let lengths: Vec<usize> = (1..=15).collect();
        let d = dataset(&lengths);
        let h = heuristic_baseline(&d, 1.0, 1).unwrap();
        assert!(h.fallback);
        assert_eq!(h.subset.len(), 15);
        let partial = heuristic_baseline(&d, 0.6, 1).unwrap();
        assert_eq!(partial.subset.len(), 9);
        assert!(!partial.fallback);
    }

    #[test]
    fn eight_metric_with_constant_metric() {
        let mut d_samples: Vec<Sample> = dataset(&[2; 10]).samples().to_vec();
        for (i, s) in d_samples.iter_mut().enumerate() {
            let m: BTreeMap<String, BTreeMap<String, f64>> = [
                ("flat".to_string(), [("a".to_string(), 0.3), ("b".to_string(), 0.3)].into()),
                (
                    "signal".to_string(),
                    [("a".to_string(), i as f64), ("b".to_string(), i as f64)].into(),
                ),
            ]
            .into();
            s.external_metrics = Some(m);
        }
        let d = Dataset::from_samples(d_samples).unwrap();
        let config = EngineConfig {
            metric_set: vec![MetricSpec::external("flat"), MetricSpec::external("signal")],
            preliminary_metric: "signal".into(),
            rate: 0.3,
            ..EngineConfig::default()
        };
        let eight = ablation_subset(&d, &config, AblationMode::EightMetric).unwrap();
        let single = ablation_subset(&d, &config, AblationMode::SingleMetric).unwrap();
        // ranks 0, 3, 6 of descending "signal": s009, s006, s003
        assert_eq!(single, ["s009", "s006", "s003"]);
        assert_eq!(eight, single);
    }
}
