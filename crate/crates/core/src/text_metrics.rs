//! Lexical overlap metrics and the (sample, system, metric) score table fed
//! to the quality learner.
//!
//! Tokenization is lowercase plus Unicode-whitespace splitting; punctuation
//! stays attached to its word.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(str::to_owned)
        .collect()
}

type Counts<'a> = HashMap<&'a [String], usize>;

fn ngram_counts(tokens: &[String], n: usize) -> Counts<'_> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

fn clipped_overlap(candidate: &Counts<'_>, reference: &Counts<'_>) -> usize {
    candidate
        .iter()
        .map(|(g, &c)| c.min(reference.get(g).copied().unwrap_or(0)))
        .sum()
}

fn f1(overlap: usize, candidate_total: usize, reference_total: usize) -> f64 {
    if overlap == 0 || candidate_total == 0 || reference_total == 0 {
        return 0.0;
    }
    let p = overlap as f64 / candidate_total as f64;
    let r = overlap as f64 / reference_total as f64;
    2.0 * p * r / (p + r)
}

/// Multiset of adjacent word pairs of a text, with its token sequence kept
/// for the short-text rule of [`bigram_dice`].
#[derive(Debug, Clone, PartialEq)]
pub struct BigramBag {
    tokens: Vec<String>,
    counts: HashMap<(String, String), usize>,
    total: usize,
}

impl BigramBag {
    pub fn new(text: &str) -> Self {
        let tokens = tokenize(text);
        let mut counts = HashMap::new();
        for w in tokens.windows(2) {
            *counts.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
        }
        let total = tokens.len().saturating_sub(1);
        BigramBag {
            tokens,
            counts,
            total,
        }
    }

    /// Dice coefficient against another bag.
    pub fn dice(&self, other: &BigramBag) -> f64 {
        if self.total == 0 || other.total == 0 {
            let both_short = self.tokens.len() < 2 && other.tokens.len() < 2;
            return if both_short && self.tokens == other.tokens {
                1.0
            } else {
                0.0
            };
        }
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        let shared: usize = small
            .counts
            .iter()
            .map(|(g, &c)| c.min(large.counts.get(g).copied().unwrap_or(0)))
            .sum();
        2.0 * shared as f64 / (self.total + other.total) as f64
    }
}

/// Word-bigram Dice similarity in [0, 1].
///
/// Two texts with fewer than two tokens each score 1.0 when token-identical;
/// otherwise an empty bigram multiset on either side scores 0.0.
pub fn bigram_dice(a: &str, b: &str) -> f64 {
    BigramBag::new(a).dice(&BigramBag::new(b))
}

/// ROUGE-N F1 against the best-matching reference.
pub fn rouge_n(candidate: &str, references: &[String], n: usize) -> f64 {
    let cand_tokens = tokenize(candidate);
    let cand = ngram_counts(&cand_tokens, n);
    let cand_total = cand_tokens.len().saturating_sub(n.saturating_sub(1));
    if cand.is_empty() {
        return 0.0;
    }
    references
        .iter()
        .map(|r| {
            let ref_tokens = tokenize(r);
            let rc = ngram_counts(&ref_tokens, n);
            let ref_total = ref_tokens.len().saturating_sub(n - 1);
            f1(clipped_overlap(&cand, &rc), cand_total, ref_total)
        })
        .fold(0.0, f64::max)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L (LCS-based, beta = 1) F1 against the best-matching reference.
pub fn rouge_l(candidate: &str, references: &[String]) -> f64 {
    let cand = tokenize(candidate);
    if cand.is_empty() {
        return 0.0;
    }
    references
        .iter()
        .map(|r| {
            let rt = tokenize(r);
            f1(lcs_len(&cand, &rt), cand.len(), rt.len())
        })
        .fold(0.0, f64::max)
}

/// Sentence-level BLEU with uniform weights over orders `1..=max_n`.
///
/// Counts are clipped by the maximum count over references. A zero match
/// count at order n >= 2 is smoothed to `1 / (total_n + 1)`; a zero unigram
/// match count yields 0. The brevity penalty uses the reference length
/// closest to the candidate length (shorter wins ties).
pub fn bleu(candidate: &str, references: &[String], max_n: usize) -> f64 {
    let max_n = max_n.max(1);
    let cand = tokenize(candidate);
    if cand.is_empty() || references.is_empty() {
        return 0.0;
    }
    let refs: Vec<Vec<String>> = references.iter().map(|r| tokenize(r)).collect();

    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let cc = ngram_counts(&cand, n);
        let total = cand.len().saturating_sub(n - 1);
        let ref_counts: Vec<Counts<'_>> = refs.iter().map(|r| ngram_counts(r, n)).collect();
        let matched: usize = cc
            .iter()
            .map(|(g, &c)| {
                let max_ref = ref_counts
                    .iter()
                    .map(|rc| rc.get(g).copied().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                c.min(max_ref)
            })
            .sum();
        let p = if matched > 0 {
            matched as f64 / total as f64
        } else if n == 1 {
            return 0.0;
        } else {
            1.0 / (total as f64 + 1.0)
        };
        log_sum += p.ln();
    }

    let c = cand.len();
    let r = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(0);
    let bp = if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    (bp * (log_sum / max_n as f64).exp()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Internal,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub name: String,
    pub kind: MetricKind,
}

pub const INTERNAL_METRICS: [&str; 4] = ["rouge_1", "rouge_2", "rouge_l", "bleu"];
pub const DEFAULT_EXTERNAL_METRICS: [&str; 4] =
    ["bert_score", "mover_score", "bart_score", "meteor"];

impl MetricSpec {
    pub fn internal(name: &str) -> Self {
        MetricSpec {
            name: name.to_string(),
            kind: MetricKind::Internal,
        }
    }

    pub fn external(name: &str) -> Self {
        MetricSpec {
            name: name.to_string(),
            kind: MetricKind::External,
        }
    }

    /// Resolves a bare name: the four lexical metrics are internal, anything
    /// else is read from the dataset.
    pub fn by_name(name: &str) -> Self {
        if INTERNAL_METRICS.contains(&name) {
            MetricSpec::internal(name)
        } else {
            MetricSpec::external(name)
        }
    }

    fn compute(&self, candidate: &str, references: &[String]) -> Result<f64> {
        Ok(match self.name.as_str() {
            "rouge_1" => rouge_n(candidate, references, 1),
            "rouge_2" => rouge_n(candidate, references, 2),
            "rouge_l" => rouge_l(candidate, references),
            "bleu" => bleu(candidate, references, 4),
            other => return Err(Error::UnknownMetric(other.to_string())),
        })
    }
}

/// The eight-metric set: four lexical metrics plus four ingested ones.
pub fn default_metric_set() -> Vec<MetricSpec> {
    INTERNAL_METRICS
        .iter()
        .map(|n| MetricSpec::internal(n))
        .chain(DEFAULT_EXTERNAL_METRICS.iter().map(|n| MetricSpec::external(n)))
        .collect()
}

/// Dense score table indexed by (sample, system, metric).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMatrix {
    pub sample_ids: Vec<String>,
    pub systems: Vec<String>,
    pub metric_names: Vec<String>,
    scores: Vec<f64>,
}

impl MetricMatrix {
    pub fn from_parts(
        sample_ids: Vec<String>,
        systems: Vec<String>,
        metric_names: Vec<String>,
        scores: Vec<f64>,
    ) -> Result<Self> {
        let expected = sample_ids.len() * systems.len() * metric_names.len();
        if scores.len() != expected {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: expected,
            });
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("metric matrix has non-finite cells".into()));
        }
        Ok(MetricMatrix {
            sample_ids,
            systems,
            metric_names,
            scores,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    /// Width of one sample's feature row.
    pub fn row_width(&self) -> usize {
        self.systems.len() * self.metric_names.len()
    }

    pub fn get(&self, sample: usize, system: usize, metric: usize) -> f64 {
        self.scores[sample * self.row_width() + system * self.metric_names.len() + metric]
    }

    /// Row of one sample, system-major and metric-minor.
    pub fn row(&self, sample: usize) -> Option<&[f64]> {
        let w = self.row_width();
        self.scores.get(sample * w..(sample + 1) * w)
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metric_names.iter().position(|m| m == name)
    }
}

/// Computes internal metrics and copies external ones for every cell.
pub fn build_metric_matrix(d: &Dataset, metric_set: &[MetricSpec]) -> Result<MetricMatrix> {
    let mut scores = Vec::with_capacity(d.len() * d.systems().len() * metric_set.len());
    for s in d.samples() {
        for sys in d.systems() {
            for spec in metric_set {
                let v = match spec.kind {
                    MetricKind::Internal => spec.compute(s.output(sys), &s.references)?,
                    MetricKind::External => s.external_metric(&spec.name, sys).ok_or_else(|| {
                        Error::MissingMetricCell {
                            metric: spec.name.clone(),
                            sample_id: s.sample_id.clone(),
                            system: sys.clone(),
                        }
                    })?,
                };
                scores.push(v);
            }
        }
    }
    MetricMatrix::from_parts(
        d.samples().iter().map(|s| s.sample_id.clone()).collect(),
        d.systems().to_vec(),
        metric_set.iter().map(|m| m.name.clone()).collect(),
        scores,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn refs(r: &[&str]) -> Vec<String> {
        r.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn dice_examples() {
        assert_eq!(bigram_dice("the cat sat on", "the cat sat on"), 1.0);
        assert_eq!(bigram_dice("a b c", "d e f"), 0.0);
        assert_eq!(bigram_dice("the cat sat", "the cat ran"), 0.5);
    }

    #[test]
    fn dice_short_texts() {
        assert_eq!(bigram_dice("", ""), 1.0);
        assert_eq!(bigram_dice("Word", "word"), 1.0);
        assert_eq!(bigram_dice("word", "other"), 0.0);
        assert_eq!(bigram_dice("word", "word two"), 0.0);
    }

    #[test]
    fn dice_counts_multiset() {
        // {a·a ×2} vs {a·a ×1}: 2·1/(2+1)
        assert!((bigram_dice("a a a", "a a") - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rouge_examples() {
        assert_eq!(rouge_n("the cat sat", &refs(&["the cat sat"]), 1), 1.0);
        assert!((rouge_n("the cat sat", &refs(&["the cat ran"]), 1) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(rouge_n("anything", &[], 1), 0.0);
        assert!((rouge_l("a b c d", &refs(&["a c d"])) - 6.0 / 7.0).abs() < 1e-15);
        assert_eq!(rouge_l("x", &refs(&["y"])), 0.0);
        assert_eq!(rouge_l("same text", &refs(&["same text"])), 1.0);
        assert_eq!(rouge_l("", &refs(&["y"])), 0.0);
    }

    #[test]
    fn rouge_takes_best_reference() {
        let r = refs(&["nothing shared", "the cat sat"]);
        assert_eq!(rouge_n("the cat sat", &r, 2), 1.0);
    }

    #[test]
    fn bleu_edges() {
        assert_eq!(bleu("a b c d e", &refs(&["a b c d e"]), 4), 1.0);
        assert_eq!(bleu("x y z", &refs(&["a b c"]), 4), 0.0);
        assert_eq!(bleu("", &refs(&["a"]), 4), 0.0);
        assert_eq!(bleu("a b", &[], 4), 0.0);
    }

    #[test]
    fn bleu_brevity_penalty() {
        // p1 = 1, p2 = 1, BP = exp(1 - 4/2)
        let v = bleu("a b", &refs(&["a b c d"]), 2);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn bleu_smooths_higher_orders() {
        // unigrams 2/2; bigram "a c" unmatched -> 1/(1+1)
        let v = bleu("a c", &refs(&["a b c"]), 2);
        let expected = (1.0f64 * 0.5).sqrt() * (1.0 - 3.0 / 2.0f64).exp();
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn by_name_resolves_kind() {
        assert_eq!(MetricSpec::by_name("rouge_l").kind, MetricKind::Internal);
        assert_eq!(MetricSpec::by_name("mover_score").kind, MetricKind::External);
        assert_eq!(default_metric_set().len(), 8);
    }
}
