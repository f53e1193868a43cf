//! Multi-phase selection: a preliminary phase ranked by a single metric,
//! then batch phases ranked by a learner retrained on every annotated
//! sample so far. Each phase buckets the unselected pool systematically and
//! lets the controller pick one sample per bucket.
//!
//! The engine is a pure function of (dataset, config) under the simulated
//! oracle. Live sessions persist [`EngineState`] between phases.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::{initials, select_phase, ControllerConfig, OutputBigrams};
use crate::dataset::{Dataset, HumanScores};
use crate::error::{Error, Result};
use crate::learner::{
    build_features, build_targets, predict_quality, preliminary_quality, GbdtModel, GbdtParams,
    QualityRanking, Regressor,
};
use crate::sampler::make_buckets;
use crate::text_metrics::{build_metric_matrix, MetricMatrix, MetricSpec};

pub const STATE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PlanMode {
    /// Every phase gets a near-equal share of the budget.
    Average,
    /// The preliminary phase takes `preliminary_ratio * N`; the rest is
    /// shared evenly by the batch phases.
    PreliminaryFixed { preliminary_ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub rate: f64,
    pub phase_count: usize,
    pub quotas: Vec<usize>,
    #[serde(flatten)]
    pub mode: PlanMode,
}

impl PhasePlan {
    pub fn total(&self) -> usize {
        self.quotas.iter().sum()
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Subset size for rate `r` over `n` samples.
pub fn subset_size(n: usize, r: f64) -> usize {
    round_half_up(r * n as f64)
}

/// Splits `total` into `parts` near-equal shares, surplus to the front.
fn split_evenly(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

pub fn plan_phases(n: usize, rate: f64, phase_count: usize, mode: PlanMode) -> Result<PhasePlan> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidPlan(format!("sampling rate {rate} outside (0, 1]")));
    }
    if phase_count == 0 {
        return Err(Error::InvalidPlan("at least one phase is required".into()));
    }
    let k = subset_size(n, rate);
    if k < phase_count {
        return Err(Error::InvalidPlan(format!(
            "subset of {k} samples cannot cover {phase_count} phases"
        )));
    }
    let quotas = match mode {
        PlanMode::Average => split_evenly(k, phase_count),
        PlanMode::PreliminaryFixed { preliminary_ratio } => {
            if phase_count < 2 {
                return Err(Error::InvalidPlan(
                    "preliminary_fixed mode needs at least 2 phases".into(),
                ));
            }
            let first = round_half_up(preliminary_ratio * n as f64);
            if first == 0 || first + (phase_count - 1) > k {
                return Err(Error::InvalidPlan(format!(
                    "preliminary quota {first} leaves too little of {k} for {} batch phases",
                    phase_count - 1
                )));
            }
            let mut q = vec![first];
            q.extend(split_evenly(k - first, phase_count - 1));
            q
        }
    };
    Ok(PhasePlan {
        rate,
        phase_count,
        quotas,
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Human scores are read from the dataset.
    Simulated,
    /// Human scores arrive through [`Engine::ingest_annotations`].
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Bucket choice through the redundancy controller.
    Constrained,
    /// Every bucket yields its initial selection sample.
    InitialOnly,
}

/// Inclusive bounds on ingested human scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikertScale {
    pub min: f64,
    pub max: f64,
}

impl Default for LikertScale {
    fn default() -> Self {
        LikertScale { min: 1.0, max: 5.0 }
    }
}

impl LikertScale {
    pub fn contains(&self, v: f64) -> bool {
        (self.min..=self.max).contains(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub metric_set: Vec<MetricSpec>,
    pub preliminary_metric: String,
    pub rate: f64,
    pub phases: usize,
    #[serde(flatten)]
    pub mode: PlanMode,
    pub controller: ControllerConfig,
    pub learner: GbdtParams,
    pub selection: SelectionRule,
    pub oracle: OracleKind,
    pub blinding_seed: u64,
    /// Aspects to annotate; empty means the dataset's own aspects.
    #[serde(default)]
    pub aspects: Vec<String>,
    /// Bounds enforced on ingested scores.
    #[serde(default)]
    pub scale: LikertScale,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            metric_set: crate::text_metrics::default_metric_set(),
            preliminary_metric: "mover_score".into(),
            rate: 0.5,
            phases: 5,
            mode: PlanMode::Average,
            controller: ControllerConfig::default(),
            learner: GbdtParams::default(),
            selection: SelectionRule::Constrained,
            oracle: OracleKind::Simulated,
            blinding_seed: 0,
            aspects: Vec::new(),
            scale: LikertScale::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    AwaitingAnnotation,
    ReadyToSelect,
    Complete,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::AwaitingAnnotation => "awaiting_annotation",
            Status::ReadyToSelect => "ready_to_select",
            Status::Complete => "complete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub phase: usize,
    pub sample_id: String,
}

/// Where the dataset of a persisted session lives.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<PathBuf>,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub version: u32,
    pub dataset: DatasetRef,
    pub config: EngineConfig,
    pub plan: PhasePlan,
    /// Index of the most recent phase; `None` before the preliminary phase.
    pub phase: Option<usize>,
    pub selected: Vec<Selection>,
    pub annotations: BTreeMap<String, HumanScores>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<GbdtModel>,
    /// Per phase, system ids in blinded-label order ("System 1" first).
    pub blinding: BTreeMap<usize, Vec<String>>,
}

impl EngineState {
    pub fn selected_ids(&self) -> Vec<String> {
        self.selected.iter().map(|s| s.sample_id.clone()).collect()
    }

    pub fn phase_ids(&self, phase: usize) -> Vec<String> {
        self.selected
            .iter()
            .filter(|s| s.phase == phase)
            .map(|s| s.sample_id.clone())
            .collect()
    }

    pub fn current_phase_ids(&self) -> Vec<String> {
        self.phase.map(|p| self.phase_ids(p)).unwrap_or_default()
    }

    pub fn is_annotated(&self, sample_id: &str, systems: &[String], aspects: &[String]) -> bool {
        self.annotations.get(sample_id).is_some_and(|hs| {
            systems.iter().all(|sys| {
                hs.get(sys)
                    .is_some_and(|a| aspects.iter().all(|k| a.contains_key(k)))
            })
        })
    }

    pub fn label_of(phase_blinding: &[String], system: &str) -> Option<String> {
        phase_blinding
            .iter()
            .position(|s| s == system)
            .map(|i| format!("System {}", i + 1))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::CorruptState(e.to_string()))?;
        let version = value
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::CorruptState("missing version".into()))?;
        if version != u64::from(STATE_VERSION) {
            return Err(Error::StateVersion {
                found: version as u32,
                expected: STATE_VERSION,
            });
        }
        serde_json::from_value(value).map_err(|e| Error::CorruptState(e.to_string()))
    }

    /// Writes through a temporary file and renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, self.to_json()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindedOutput {
    pub label: String,
    pub text: String,
}

/// One sample as shown to annotators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub sample_id: String,
    pub source: String,
    pub references: Vec<String>,
    pub outputs: Vec<BlindedOutput>,
}

/// One annotator judgment: all aspect scores for one blinded output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub sample_id: String,
    pub blinded_label: String,
    pub scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSelection {
    pub phase: usize,
    pub quota: usize,
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub plan: PhasePlan,
    pub phases: Vec<PhaseSelection>,
    pub final_subset: Vec<String>,
    /// Learner fitted in each batch phase, in phase order.
    pub models: Vec<GbdtModel>,
}

impl SelectionResult {
    fn from_state(state: &EngineState, models: Vec<GbdtModel>) -> Self {
        let last = state.phase.map_or(0, |t| t + 1);
        let phases = (0..last)
            .map(|p| PhaseSelection {
                phase: p,
                quota: state.plan.quotas[p],
                selected: state.phase_ids(p),
            })
            .collect();
        SelectionResult {
            plan: state.plan.clone(),
            phases,
            final_subset: state.selected_ids(),
            models,
        }
    }
}

/// Selection engine bound to one dataset and configuration.
pub struct Engine<'d> {
    dataset: &'d Dataset,
    config: EngineConfig,
    plan: PhasePlan,
    metrics: MetricMatrix,
    preliminary: MetricMatrix,
    redundancy: OutputBigrams,
    aspects: Vec<String>,
}

impl<'d> Engine<'d> {
    pub fn new(dataset: &'d Dataset, config: EngineConfig) -> Result<Self> {
        ControllerConfig::new(config.controller.tau)?;
        config.learner.validate()?;
        if config.metric_set.is_empty() {
            return Err(Error::InvalidConfig("metric set is empty".into()));
        }
        let plan = plan_phases(dataset.len(), config.rate, config.phases, config.mode)?;
        let aspects = if config.aspects.is_empty() {
            dataset.aspects().to_vec()
        } else {
            config.aspects.clone()
        };
        if aspects.is_empty() {
            return Err(Error::InvalidConfig(
                "no annotation aspects: the dataset has no human scores and none are configured"
                    .into(),
            ));
        }
        if config.oracle == OracleKind::Simulated {
            if !dataset.has_complete_human_scores() {
                return Err(Error::InvalidDataset(
                    "simulated oracle requires human scores on every sample".into(),
                ));
            }
            if let Some(a) = aspects.iter().find(|a| !dataset.aspects().contains(a)) {
                return Err(Error::InvalidConfig(format!(
                    "aspect `{a}` is not scored in the dataset"
                )));
            }
        }
        let metrics = build_metric_matrix(dataset, &config.metric_set)?;
        let preliminary = match metrics.metric_index(&config.preliminary_metric) {
            Some(_) => metrics.clone(),
            None => build_metric_matrix(
                dataset,
                &[MetricSpec::by_name(&config.preliminary_metric)],
            )?,
        };
        Ok(Engine {
            dataset,
            redundancy: OutputBigrams::new(dataset),
            config,
            plan,
            metrics,
            preliminary,
            aspects,
        })
    }

    /// Rebuilds the engine a persisted session was created with.
    pub fn for_state(dataset: &'d Dataset, state: &EngineState) -> Result<Self> {
        if state.dataset.digest != dataset.digest() {
            return Err(Error::CorruptState(
                "dataset does not match the digest recorded in the state".into(),
            ));
        }
        let engine = Engine::new(dataset, state.config.clone())?;
        if engine.plan != state.plan {
            return Err(Error::CorruptState("phase plan does not match configuration".into()));
        }
        Ok(engine)
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn plan(&self) -> &PhasePlan {
        &self.plan
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn aspects(&self) -> &[String] {
        &self.aspects
    }

    pub fn metrics(&self) -> &MetricMatrix {
        &self.metrics
    }

    pub fn fresh_state(&self) -> EngineState {
        EngineState {
            version: STATE_VERSION,
            dataset: DatasetRef {
                path: None,
                sidecar: None,
                digest: self.dataset.digest(),
            },
            config: self.config.clone(),
            plan: self.plan.clone(),
            phase: None,
            selected: Vec::new(),
            annotations: BTreeMap::new(),
            status: Status::ReadyToSelect,
            model: None,
            blinding: BTreeMap::new(),
        }
    }

    /// Ranking used by the preliminary phase.
    pub fn preliminary_ranking(&self) -> Result<QualityRanking> {
        preliminary_quality(&self.preliminary, &self.config.preliminary_metric)
    }

    pub fn run_preliminary(&self, state: &EngineState) -> Result<EngineState> {
        require(state, Status::ReadyToSelect)?;
        if state.phase.is_some() {
            return Err(Error::InvalidInput("preliminary phase already ran".into()));
        }
        let ranking = self.preliminary_ranking()?;
        let chosen = self.choose(&ranking, self.plan.quotas[0], &[])?;
        Ok(self.commit(state, 0, chosen, None))
    }

    pub fn run_batch_phase(&self, state: &EngineState) -> Result<EngineState> {
        require(state, Status::ReadyToSelect)?;
        let Some(t) = state.phase else {
            return Err(Error::InvalidInput("preliminary phase has not run".into()));
        };
        if t + 1 >= self.plan.phase_count {
            return Err(Error::InvalidInput("all phases are complete".into()));
        }
        let (model, ranking) = self.learn_and_rank(state)?;
        let prior = state.selected_ids();
        let chosen = self.choose(&ranking, self.plan.quotas[t + 1], &prior)?;
        Ok(self.commit(state, t + 1, chosen, Some(model)))
    }

    /// Runs whichever phase comes next.
    pub fn advance(&self, state: &EngineState) -> Result<EngineState> {
        match state.phase {
            None => self.run_preliminary(state),
            Some(_) => self.run_batch_phase(state),
        }
    }

    /// Fits the learner on every annotated selection and ranks the rest.
    pub fn learn_and_rank(&self, state: &EngineState) -> Result<(GbdtModel, QualityRanking)> {
        let systems = self.dataset.systems();
        let selected = state.selected_ids();
        let mut pool = Vec::with_capacity(selected.len());
        for id in &selected {
            if !state.is_annotated(id, systems, &self.aspects) {
                return Err(Error::IncompleteAnnotation(id.clone()));
            }
            pool.push((id.as_str(), &state.annotations[id]));
        }
        let targets = build_targets(&pool, &self.aspects, systems)?;
        let mut x = Vec::with_capacity(pool.len());
        let mut y = Vec::with_capacity(pool.len());
        for (id, _) in &pool {
            x.push(build_features(&self.metrics, self.index(id)?)?);
            y.push(targets[*id]);
        }
        let model = self.config.learner.fit(&x, &y)?;

        let taken: BTreeSet<&str> = selected.iter().map(String::as_str).collect();
        let rest = self
            .dataset
            .samples()
            .iter()
            .enumerate()
            .filter(|(_, s)| !taken.contains(s.sample_id.as_str()))
            .map(|(i, s)| Ok((s.sample_id.clone(), build_features(&self.metrics, i)?)))
            .collect::<Result<Vec<_>>>()?;
        let ranking = predict_quality(&model, &rest)?;
        Ok((model, ranking))
    }

    fn choose(&self, ranking: &QualityRanking, quota: usize, prior: &[String]) -> Result<Vec<String>> {
        let buckets = make_buckets(ranking, quota)?;
        Ok(match self.config.selection {
            SelectionRule::Constrained => {
                select_phase(&buckets, prior, &self.redundancy, &self.config.controller)
            }
            SelectionRule::InitialOnly => initials(&buckets),
        })
    }

    fn commit(
        &self,
        state: &EngineState,
        phase: usize,
        chosen: Vec<String>,
        model: Option<GbdtModel>,
    ) -> EngineState {
        let mut next = state.clone();
        next.phase = Some(phase);
        next.selected
            .extend(chosen.into_iter().map(|sample_id| Selection { phase, sample_id }));
        if model.is_some() {
            next.model = model;
        }
        next.blinding.insert(phase, self.blinding_for(phase));
        match self.config.oracle {
            OracleKind::Simulated => {
                for id in next.phase_ids(phase) {
                    let scores = self.oracle_scores(&id);
                    next.annotations.insert(id, scores);
                }
                next.status = self.after_annotation(phase);
            }
            OracleKind::Live => next.status = Status::AwaitingAnnotation,
        }
        next
    }

    fn after_annotation(&self, phase: usize) -> Status {
        if phase + 1 >= self.plan.phase_count {
            Status::Complete
        } else {
            Status::ReadyToSelect
        }
    }

    fn oracle_scores(&self, id: &str) -> HumanScores {
        let hs = self
            .dataset
            .sample(id)
            .and_then(|s| s.human_scores.as_ref())
            .expect("simulated oracle checked at construction");
        hs.iter()
            .map(|(sys, per_aspect)| {
                let kept = per_aspect
                    .iter()
                    .filter(|(a, _)| self.aspects.contains(a))
                    .map(|(a, v)| (a.clone(), *v))
                    .collect();
                (sys.clone(), kept)
            })
            .collect()
    }

    fn blinding_for(&self, phase: usize) -> Vec<String> {
        let seed = self.config.blinding_seed
            ^ (phase as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = self.dataset.systems().to_vec();
        order.shuffle(&mut rng);
        order
    }

    fn index(&self, id: &str) -> Result<usize> {
        self.dataset
            .index_of(id)
            .ok_or_else(|| Error::sample(id, "not in dataset"))
    }

    /// Samples of the current phase still missing some score.
    pub fn pending(&self, state: &EngineState) -> Vec<String> {
        state
            .current_phase_ids()
            .into_iter()
            .filter(|id| !state.is_annotated(id, self.dataset.systems(), &self.aspects))
            .collect()
    }

    /// Blinded view of the current phase's samples.
    pub fn batch(&self, state: &EngineState, pending_only: bool) -> Vec<BatchItem> {
        let Some(phase) = state.phase else {
            return Vec::new();
        };
        let order = state.blinding.get(&phase).cloned().unwrap_or_default();
        let ids = if pending_only {
            self.pending(state)
        } else {
            state.phase_ids(phase)
        };
        ids.into_iter()
            .filter_map(|id| self.dataset.sample(&id))
            .map(|s| BatchItem {
                sample_id: s.sample_id.clone(),
                source: s.source.clone(),
                references: s.references.clone(),
                outputs: order
                    .iter()
                    .enumerate()
                    .map(|(i, sys)| BlindedOutput {
                        label: format!("System {}", i + 1),
                        text: s.output(sys).to_string(),
                    })
                    .collect(),
            })
            .collect()
    }

    /// Merges scores for the current phase. All records are checked before
    /// any is applied. Resubmitting identical scores is accepted without
    /// change; altering a recorded score is rejected.
    pub fn ingest_annotations(
        &self,
        state: &EngineState,
        records: &[AnnotationRecord],
    ) -> Result<EngineState> {
        let Some(phase) = state.phase else {
            return Err(Error::WrongStatus {
                expected: Status::AwaitingAnnotation.as_str(),
                actual: "not_started",
            });
        };
        let current: BTreeSet<String> = state.phase_ids(phase).into_iter().collect();
        let order = state.blinding.get(&phase).cloned().unwrap_or_default();

        let mut next = state.clone();
        let mut changed = false;
        for rec in records {
            let reject = |message: String| Error::AnnotationRejected {
                sample_id: rec.sample_id.clone(),
                message,
            };
            if !current.contains(&rec.sample_id) {
                return Err(reject("sample is not pending in the current phase".into()));
            }
            let label_index = rec
                .blinded_label
                .strip_prefix("System ")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|n| (1..=order.len()).contains(n))
                .ok_or_else(|| reject(format!("unknown label `{}`", rec.blinded_label)))?;
            let system = &order[label_index - 1];
            for (aspect, value) in &rec.scores {
                if !self.aspects.contains(aspect) {
                    return Err(reject(format!("unknown aspect `{aspect}`")));
                }
                if !value.is_finite() {
                    return Err(reject(format!("non-finite score for `{aspect}`")));
                }
                let scale = self.config.scale;
                if !scale.contains(*value) {
                    return Err(reject(format!(
                        "{} `{aspect}` score {value} outside [{}, {}]",
                        rec.blinded_label, scale.min, scale.max
                    )));
                }
                let slot = next
                    .annotations
                    .entry(rec.sample_id.clone())
                    .or_default()
                    .entry(system.clone())
                    .or_default();
                match slot.get(aspect) {
                    Some(old) if old == value => {}
                    Some(_) => {
                        return Err(reject(format!(
                            "{} `{aspect}` already recorded with a different value",
                            rec.blinded_label
                        )))
                    }
                    None => {
                        slot.insert(aspect.clone(), *value);
                        changed = true;
                    }
                }
            }
        }
        if changed && state.status != Status::AwaitingAnnotation {
            return Err(Error::WrongStatus {
                expected: Status::AwaitingAnnotation.as_str(),
                actual: state.status.as_str(),
            });
        }
        if !changed {
            return Ok(state.clone());
        }
        if self.pending(&next).is_empty() {
            next.status = self.after_annotation(phase);
        }
        Ok(next)
    }

    /// Runs every phase with the simulated oracle.
    pub fn run_simulation(&self) -> Result<SelectionResult> {
        if self.config.oracle != OracleKind::Simulated {
            return Err(Error::InvalidConfig("simulation requires the simulated oracle".into()));
        }
        let mut state = self.fresh_state();
        let mut models = Vec::new();
        while state.status != Status::Complete {
            state = self.advance(&state)?;
            if let (Some(t), Some(m)) = (state.phase, &state.model) {
                if t > 0 {
                    models.push(m.clone());
                }
            }
        }
        Ok(SelectionResult::from_state(&state, models))
    }

    pub fn result(&self, state: &EngineState) -> SelectionResult {
        SelectionResult::from_state(state, state.model.iter().cloned().collect())
    }
}

fn require(state: &EngineState, status: Status) -> Result<()> {
    if state.status != status {
        return Err(Error::WrongStatus {
            expected: status.as_str(),
            actual: state.status.as_str(),
        });
    }
    Ok(())
}

/// Convenience wrapper: simulate with the given config.
pub fn run_simulation(d: &Dataset, config: EngineConfig) -> Result<SelectionResult> {
    Engine::new(d, config)?.run_simulation()
}
