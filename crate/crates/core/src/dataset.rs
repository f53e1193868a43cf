//! The evaluation population: source inputs, per-system outputs, optional
//! human scores and optional precomputed metric scores.
//!
//! Systems and aspects are kept in lexicographic order. Every feature
//! vector, score table and report in the crate uses that order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Per-system, per-aspect human scores of one sample.
pub type HumanScores = BTreeMap<String, BTreeMap<String, f64>>;
/// Per-metric, per-system precomputed scores of one sample.
pub type ExternalMetrics = BTreeMap<String, BTreeMap<String, f64>>;
/// Sidecar layout: metric -> sample_id -> system -> score.
pub type MetricSidecar = BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub sample_id: String,
    pub source: String,
    #[serde(default)]
    pub references: Vec<String>,
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_scores: Option<HumanScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_metrics: Option<ExternalMetrics>,
}

impl Sample {
    pub fn output(&self, system: &str) -> &str {
        self.outputs.get(system).map(String::as_str).unwrap_or("")
    }

    pub fn human_score(&self, system: &str, aspect: &str) -> Option<f64> {
        self.human_scores.as_ref()?.get(system)?.get(aspect).copied()
    }

    pub fn external_metric(&self, metric: &str, system: &str) -> Option<f64> {
        self.external_metrics.as_ref()?.get(metric)?.get(system).copied()
    }
}

/// Immutable, validated population.
#[derive(Debug, Clone)]
pub struct Dataset {
    samples: Vec<Sample>,
    systems: Vec<String>,
    aspects: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.samples == other.samples
            && self.systems == other.systems
            && self.aspects == other.aspects
    }
}

impl Dataset {
    /// Builds a dataset, inferring systems and aspects as sorted unions.
    ///
    /// Fails on duplicate or empty sample ids, samples whose outputs do not
    /// cover the system union, incomplete human scores, non-finite scores,
    /// fewer than one sample or fewer than two systems.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDataset("dataset has no samples".into()));
        }
        let mut index = HashMap::with_capacity(samples.len());
        let mut systems = BTreeSet::new();
        let mut aspects = BTreeSet::new();
        for (i, s) in samples.iter().enumerate() {
            if s.sample_id.is_empty() {
                return Err(Error::InvalidDataset(format!(
                    "sample at position {} has an empty sample_id",
                    i + 1
                )));
            }
            if index.insert(s.sample_id.clone(), i).is_some() {
                return Err(Error::sample(&s.sample_id, "duplicate sample_id"));
            }
            systems.extend(s.outputs.keys().cloned());
            if let Some(hs) = &s.human_scores {
                systems.extend(hs.keys().cloned());
                for per_aspect in hs.values() {
                    aspects.extend(per_aspect.keys().cloned());
                }
            }
        }
        let systems: Vec<String> = systems.into_iter().collect();
        let aspects: Vec<String> = aspects.into_iter().collect();
        if systems.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 systems, found {}",
                systems.len()
            )));
        }

        for s in &samples {
            if let Some(missing) = systems.iter().find(|sys| !s.outputs.contains_key(*sys)) {
                return Err(Error::sample(
                    &s.sample_id,
                    format!("missing output for system `{missing}`"),
                ));
            }
            if let Some(hs) = &s.human_scores {
                for sys in &systems {
                    let Some(per_aspect) = hs.get(sys) else {
                        return Err(Error::sample(
                            &s.sample_id,
                            format!("human scores missing system `{sys}`"),
                        ));
                    };
                    for aspect in &aspects {
                        match per_aspect.get(aspect) {
                            None => {
                                return Err(Error::sample(
                                    &s.sample_id,
                                    format!("human scores missing aspect `{aspect}` for `{sys}`"),
                                ))
                            }
                            Some(v) if !v.is_finite() => {
                                return Err(Error::sample(&s.sample_id, "non-finite human score"))
                            }
                            Some(_) => {}
                        }
                    }
                }
            }
            if let Some(em) = &s.external_metrics {
                for (metric, per_system) in em {
                    if let Some(sys) = per_system.keys().find(|k| index_of(&systems, k).is_none()) {
                        return Err(Error::sample(
                            &s.sample_id,
                            format!("metric `{metric}` names unknown system `{sys}`"),
                        ));
                    }
                    if per_system.values().any(|v| !v.is_finite()) {
                        return Err(Error::sample(
                            &s.sample_id,
                            format!("metric `{metric}` has a non-finite score"),
                        ));
                    }
                }
            }
        }

        Ok(Dataset {
            samples,
            systems,
            aspects,
            index,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn aspects(&self) -> &[String] {
        &self.aspects
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn index_of(&self, sample_id: &str) -> Option<usize> {
        self.index.get(sample_id).copied()
    }

    pub fn sample(&self, sample_id: &str) -> Option<&Sample> {
        self.index_of(sample_id).map(|i| &self.samples[i])
    }

    pub fn system_index(&self, system: &str) -> Option<usize> {
        index_of(&self.systems, system)
    }

    /// True when every sample carries human scores.
    pub fn has_complete_human_scores(&self) -> bool {
        !self.aspects.is_empty() && self.samples.iter().all(|s| s.human_scores.is_some())
    }

    /// Merges a metric sidecar into the samples' external metrics.
    /// Sidecar values take precedence over values already in the records.
    pub fn with_sidecar(self, sidecar: &MetricSidecar) -> Result<Self> {
        let mut samples = self.samples;
        let index = self.index;
        for (metric, per_sample) in sidecar {
            for (sample_id, per_system) in per_sample {
                let Some(&i) = index.get(sample_id) else {
                    return Err(Error::sample(
                        sample_id,
                        format!("sidecar metric `{metric}` names an unknown sample"),
                    ));
                };
                let slot = samples[i]
                    .external_metrics
                    .get_or_insert_with(BTreeMap::new)
                    .entry(metric.clone())
                    .or_default();
                for (sys, v) in per_system {
                    slot.insert(sys.clone(), *v);
                }
            }
        }
        Dataset::from_samples(samples)
    }

    /// One JSON object per line, in sample order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            let line = serde_json::to_string(s).expect("samples always serialize");
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let sample: Sample = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            samples.push(sample);
        }
        Dataset::from_samples(samples)
    }

    /// SHA-256 of the canonical JSONL rendering.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }
}

fn index_of(sorted: &[String], key: &str) -> Option<usize> {
    sorted.binary_search_by(|s| s.as_str().cmp(key)).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Jsonl,
}

pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        DatasetFormat::Jsonl => Dataset::from_jsonl(&text),
    }
}

pub fn load_sidecar(path: impl AsRef<Path>) -> Result<MetricSidecar> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Loads a dataset and, when given, merges a metric sidecar into it.
pub fn load_with_sidecar(path: impl AsRef<Path>, sidecar: Option<&Path>) -> Result<Dataset> {
    let d = load_dataset(path, DatasetFormat::Jsonl)?;
    match sidecar {
        Some(p) => d.with_sidecar(&load_sidecar(p)?),
        None => Ok(d),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub metric_coverage: BTreeMap<String, f64>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks external-metric coverage. Coverage of a metric is the fraction of
/// (sample, system) cells holding a value; every missing cell of a required
/// metric is an error.
pub fn validate(d: &Dataset, required_metrics: &[String]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut names: BTreeSet<&str> = required_metrics.iter().map(String::as_str).collect();
    for s in d.samples() {
        if let Some(em) = &s.external_metrics {
            names.extend(em.keys().map(String::as_str));
        }
    }
    let cells = (d.len() * d.systems().len()) as f64;
    for name in names {
        let required = required_metrics.iter().any(|m| m == name);
        let mut present = 0usize;
        for s in d.samples() {
            for sys in d.systems() {
                if s.external_metric(name, sys).is_some() {
                    present += 1;
                } else if required {
                    report.errors.push((
                        s.sample_id.clone(),
                        format!("metric `{name}` missing for system `{sys}`"),
                    ));
                }
            }
        }
        let coverage = present as f64 / cells;
        if !required && present > 0 && coverage < 1.0 {
            report
                .warnings
                .push(format!("metric `{name}` has partial coverage {coverage:.3}"));
        }
        report.metric_coverage.insert(name.to_string(), coverage);
    }
    if !d.aspects().is_empty() && !d.has_complete_human_scores() {
        report
            .warnings
            .push("some samples carry no human scores".to_string());
    }
    report
}
