//! Sample quality estimation: features from the metric matrix, standardized
//! human-score targets, boosted-tree regression and the induced ranking.

mod gbdt;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use gbdt::{fit_gbdt, fit_gbdt_traced, FitTrace, GbdtModel, GbdtParams, RegressionTree, TreeNode};

use crate::dataset::HumanScores;
use crate::error::{Error, Result};
use crate::text_metrics::MetricMatrix;

/// A regressor the engine can retrain each phase.
pub trait Regressor {
    type Model: Predictor;

    fn fit(&self, features: &[Vec<f64>], targets: &[f64]) -> Result<Self::Model>;
}

pub trait Predictor {
    fn predict(&self, features: &[f64]) -> Result<f64>;
}

impl Regressor for GbdtParams {
    type Model = GbdtModel;

    fn fit(&self, features: &[Vec<f64>], targets: &[f64]) -> Result<GbdtModel> {
        fit_gbdt(features, targets, self)
    }
}

impl Predictor for GbdtModel {
    fn predict(&self, features: &[f64]) -> Result<f64> {
        GbdtModel::predict(self, features)
    }
}

/// Flattened metric row of one sample (system-major, metric-minor).
pub fn build_features(mm: &MetricMatrix, sample_index: usize) -> Result<Vec<f64>> {
    mm.row(sample_index)
        .map(<[f64]>::to_vec)
        .ok_or(Error::IndexOutOfRange {
            index: sample_index,
            len: mm.n_samples(),
        })
}

/// Learner targets: per aspect, z-score every (sample, system) score over
/// the annotated pool (population standard deviation; zero-variance aspects
/// give 0), then sum a sample's z-scores over systems and aspects.
pub fn build_targets(
    annotated: &[(&str, &HumanScores)],
    aspects: &[String],
    systems: &[String],
) -> Result<BTreeMap<String, f64>> {
    let mut table = Vec::with_capacity(annotated.len());
    for (id, scores) in annotated {
        let mut row = Vec::with_capacity(systems.len() * aspects.len());
        for sys in systems {
            for aspect in aspects {
                let v = scores
                    .get(sys)
                    .and_then(|a| a.get(aspect))
                    .copied()
                    .ok_or_else(|| Error::IncompleteAnnotation(id.to_string()))?;
                row.push(v);
            }
        }
        table.push(row);
    }

    let k = aspects.len();
    let cells = (annotated.len() * systems.len()) as f64;
    let mut stats = Vec::with_capacity(k);
    for a in 0..k {
        let column = || table.iter().flat_map(|row| row.iter().skip(a).step_by(k));
        let mean = column().sum::<f64>() / cells;
        let var = column().map(|v| (v - mean) * (v - mean)).sum::<f64>() / cells;
        stats.push((mean, var.sqrt()));
    }

    let mut targets = BTreeMap::new();
    for ((id, _), row) in annotated.iter().zip(&table) {
        let mut total = 0.0;
        for (c, v) in row.iter().enumerate() {
            let (mean, sd) = stats[c % k];
            if sd > 0.0 {
                total += (v - mean) / sd;
            }
        }
        targets.insert(id.to_string(), total);
    }
    Ok(targets)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSample {
    pub sample_id: String,
    pub score: f64,
}

/// Samples in rank order: position 0 is the highest score, equal scores
/// are ordered by ascending sample id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityRanking {
    ranked: Vec<RankedSample>,
}

impl QualityRanking {
    pub fn from_scores(scores: impl IntoIterator<Item = (String, f64)>) -> Self {
        let mut ranked: Vec<RankedSample> = scores
            .into_iter()
            .map(|(sample_id, score)| RankedSample { sample_id, score })
            .collect();
        ranked.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.sample_id.cmp(&b.sample_id))
        });
        QualityRanking { ranked }
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn ranked(&self) -> &[RankedSample] {
        &self.ranked
    }

    pub fn at_rank(&self, rank: usize) -> Option<&RankedSample> {
        self.ranked.get(rank)
    }

    pub fn rank_of(&self, sample_id: &str) -> Option<usize> {
        self.ranked.iter().position(|r| r.sample_id == sample_id)
    }

    pub fn score_of(&self, sample_id: &str) -> Option<f64> {
        self.ranked
            .iter()
            .find(|r| r.sample_id == sample_id)
            .map(|r| r.score)
    }

    pub fn ranks(&self) -> BTreeMap<&str, usize> {
        self.ranked
            .iter()
            .enumerate()
            .map(|(i, r)| (r.sample_id.as_str(), i))
            .collect()
    }
}

pub fn predict_quality<P: Predictor>(
    model: &P,
    features: &[(String, Vec<f64>)],
) -> Result<QualityRanking> {
    let scores = features
        .iter()
        .map(|(id, x)| Ok((id.clone(), model.predict(x)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QualityRanking::from_scores(scores))
}

/// Quality from a single metric: its mean over systems for each sample.
pub fn preliminary_quality(mm: &MetricMatrix, metric: &str) -> Result<QualityRanking> {
    let m = mm
        .metric_index(metric)
        .ok_or_else(|| Error::UnknownMetric(metric.to_string()))?;
    let n_sys = mm.systems.len();
    Ok(QualityRanking::from_scores(mm.sample_ids.iter().enumerate().map(
        |(i, id)| {
            let total: f64 = (0..n_sys).map(|j| mm.get(i, j, m)).sum();
            (id.clone(), total / n_sys as f64)
        },
    )))
}
