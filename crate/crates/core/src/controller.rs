//! Redundancy-constrained choice of one final sample per bucket.
//!
//! `Vio` measures how far a candidate's outputs exceed the redundancy
//! threshold against already-selected samples; `Obj` is its rank distance
//! to the bucket's initial selection sample. Members are compared by:
//!
//! 1. feasible (`Vio == 0`) beats infeasible;
//! 2. between infeasible members, lower `Vio` wins;
//! 3. between feasible members, lower `Obj` wins;
//!
//! and remaining ties go to the lower quality rank, then the smaller id.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::sampler::Bucket;
use crate::text_metrics::BigramBag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Redundancy threshold on bigram similarity.
    pub tau: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig { tau: 0.5 }
    }
}

impl ControllerConfig {
    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidConfig(format!("tau {tau} outside [0, 1]")));
        }
        Ok(ControllerConfig { tau })
    }
}

/// Pairwise similarity between two samples' outputs.
pub trait Redundancy {
    fn similarity(&self, a: &str, b: &str) -> f64;
}

/// Precomputed bigram bags for every (sample, system) output of a dataset.
/// Similarity is the maximum same-system Dice coefficient.
#[derive(Debug, Clone)]
pub struct OutputBigrams {
    bags: Vec<Vec<BigramBag>>,
    index: HashMap<String, usize>,
}

impl OutputBigrams {
    pub fn new(d: &Dataset) -> Self {
        let bags = d
            .samples()
            .iter()
            .map(|s| d.systems().iter().map(|sys| BigramBag::new(s.output(sys))).collect())
            .collect();
        let index = d
            .samples()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.sample_id.clone(), i))
            .collect();
        OutputBigrams { bags, index }
    }
}

impl Redundancy for OutputBigrams {
    fn similarity(&self, a: &str, b: &str) -> f64 {
        let (Some(&i), Some(&j)) = (self.index.get(a), self.index.get(b)) else {
            return 0.0;
        };
        self.bags[i]
            .iter()
            .zip(&self.bags[j])
            .map(|(x, y)| x.dice(y))
            .fold(0.0, f64::max)
    }
}

/// Maximum same-system bigram Dice similarity between two samples.
pub fn sample_similarity(a: &Sample, b: &Sample) -> f64 {
    a.outputs
        .iter()
        .filter_map(|(sys, text)| {
            b.outputs
                .get(sys)
                .map(|other| BigramBag::new(text).dice(&BigramBag::new(other)))
        })
        .fold(0.0, f64::max)
}

/// Violation of a sample against the selected set, computed from texts.
pub fn vio(candidate: &Sample, selected: &[&Sample], cfg: &ControllerConfig) -> f64 {
    selected
        .iter()
        .map(|s| (sample_similarity(candidate, s) - cfg.tau).max(0.0))
        .fold(0.0, f64::max)
}

pub fn vio_with<R: Redundancy + ?Sized>(
    redundancy: &R,
    candidate: &str,
    selected: &[String],
    cfg: &ControllerConfig,
) -> f64 {
    selected
        .iter()
        .map(|s| (redundancy.similarity(candidate, s) - cfg.tau).max(0.0))
        .fold(0.0, f64::max)
}

pub fn obj(candidate_rank: usize, initial_rank: usize) -> usize {
    candidate_rank.abs_diff(initial_rank)
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate<'a> {
    id: &'a str,
    rank: usize,
    vio: f64,
    obj: usize,
}

impl Candidate<'_> {
    fn feasible(&self) -> bool {
        self.vio == 0.0
    }

    /// `Less` means `self` is the better choice.
    fn preference(&self, other: &Self) -> Ordering {
        let by_rule = match (self.feasible(), other.feasible()) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.vio.total_cmp(&other.vio),
            (true, true) => self.obj.cmp(&other.obj),
        };
        by_rule
            .then(self.rank.cmp(&other.rank))
            .then_with(|| self.id.cmp(other.id))
    }
}

pub fn select_from_bucket<R: Redundancy + ?Sized>(
    bucket: &Bucket,
    selected_so_far: &[String],
    redundancy: &R,
    cfg: &ControllerConfig,
) -> String {
    let initial_rank = bucket.initial_rank();
    bucket
        .ranked_members()
        .map(|(rank, id)| Candidate {
            id,
            rank,
            vio: vio_with(redundancy, id, selected_so_far, cfg),
            obj: obj(rank, initial_rank),
        })
        .min_by(Candidate::preference)
        .map(|c| c.id.to_string())
        .unwrap_or_else(|| bucket.initial().to_string())
}

/// Buckets are processed in ascending index; each choice joins the
/// selected set seen by later buckets.
pub fn select_phase<R: Redundancy + ?Sized>(
    buckets: &[Bucket],
    prior_selected: &[String],
    redundancy: &R,
    cfg: &ControllerConfig,
) -> Vec<String> {
    let mut selected = prior_selected.to_vec();
    let mut chosen = Vec::with_capacity(buckets.len());
    for b in buckets {
        let id = select_from_bucket(b, &selected, redundancy, cfg);
        selected.push(id.clone());
        chosen.push(id);
    }
    chosen
}

/// Initial selection samples only, bypassing the controller.
pub fn initials(buckets: &[Bucket]) -> Vec<String> {
    buckets.iter().map(|b| b.initial().to_string()).collect()
}
