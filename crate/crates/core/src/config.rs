//! Run configuration shared by the command line and the service. Loaded from
//! a JSON file; command-line flags override individual keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::dataset::{validate, Dataset};
use crate::engine::{EngineConfig, LikertScale, OracleKind, PlanMode, SelectionRule};
use crate::error::{Error, Result};
use crate::evaluation::AblationMode;
use crate::learner::GbdtParams;
use crate::text_metrics::{MetricSpec, DEFAULT_EXTERNAL_METRICS, INTERNAL_METRICS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Average,
    PreliminaryFixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
    /// Metric names; empty selects the lexical metrics plus every default
    /// external metric the dataset fully covers.
    pub metric_set: Vec<String>,
    /// Defaults to mover_score when the dataset carries it, else rouge_l.
    pub preliminary_metric: Option<String>,
    pub rate: f64,
    pub phases: usize,
    pub mode: ModeName,
    pub preliminary_ratio: Option<f64>,
    pub tau: f64,
    /// Random-baseline seeds, one report column each.
    pub seeds: Vec<u64>,
    /// Length-heuristic seeds, one report column each.
    pub heuristic_seeds: Vec<u64>,
    pub ablations: Vec<AblationMode>,
    pub learner: GbdtParams,
    pub out_dir: PathBuf,
    pub port: u16,
    pub alpha: f64,
    pub likert: LikertScale,
    pub blinding_seed: u64,
    /// Aspects for live annotation; empty uses the dataset's aspects.
    pub aspects: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            sidecar: None,
            metric_set: Vec::new(),
            preliminary_metric: None,
            rate: 0.5,
            phases: 5,
            mode: ModeName::Average,
            preliminary_ratio: None,
            tau: ControllerConfig::default().tau,
            seeds: vec![1, 2, 3],
            heuristic_seeds: vec![1, 2, 3],
            ablations: Vec::new(),
            learner: GbdtParams::default(),
            out_dir: PathBuf::from("casf_out"),
            port: 8080,
            alpha: 0.05,
            likert: LikertScale::default(),
            blinding_seed: 0,
            aspects: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    /// Checks everything that does not need the dataset.
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::InvalidConfig(format!("rate {} outside (0, 1]", self.rate)));
        }
        if self.phases == 0 {
            return Err(Error::InvalidConfig("phases must be at least 1".into()));
        }
        ControllerConfig::new(self.tau)?;
        self.learner.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.likert.min.partial_cmp(&self.likert.max) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidConfig("likert min must be below max".into()));
        }
        if self.mode == ModeName::PreliminaryFixed && self.preliminary_ratio.is_none() {
            return Err(Error::InvalidConfig(
                "preliminary_fixed mode needs preliminary_ratio".into(),
            ));
        }
        Ok(())
    }

    pub fn plan_mode(&self) -> PlanMode {
        match self.mode {
            ModeName::Average => PlanMode::Average,
            ModeName::PreliminaryFixed => PlanMode::PreliminaryFixed {
                preliminary_ratio: self.preliminary_ratio.unwrap_or(0.1),
            },
        }
    }

    /// Resolves metric names against the dataset and builds the engine
    /// configuration. A requested external metric the dataset does not fully
    /// cover is an error naming it.
    pub fn engine_config(&self, d: &Dataset, oracle: OracleKind) -> Result<EngineConfig> {
        self.validate()?;
        let coverage = validate(d, &[]).metric_coverage;
        let covered = |name: &str| {
            INTERNAL_METRICS.contains(&name) || coverage.get(name).is_some_and(|c| *c >= 1.0)
        };
        let require = |name: &str| -> Result<()> {
            if covered(name) {
                return Ok(());
            }
            let have = coverage.get(name).copied().unwrap_or(0.0);
            Err(Error::InvalidConfig(format!(
                "metric `{name}` is not available for every output (coverage {have:.3})"
            )))
        };

        let metric_set: Vec<MetricSpec> = if self.metric_set.is_empty() {
            INTERNAL_METRICS
                .iter()
                .chain(DEFAULT_EXTERNAL_METRICS.iter().filter(|m| covered(m)))
                .map(|m| MetricSpec::by_name(m))
                .collect()
        } else {
            for m in &self.metric_set {
                require(m)?;
            }
            self.metric_set.iter().map(|m| MetricSpec::by_name(m)).collect()
        };
        let preliminary_metric = match &self.preliminary_metric {
            Some(m) => {
                require(m)?;
                m.clone()
            }
            None if covered("mover_score") => "mover_score".to_string(),
            None => "rouge_l".to_string(),
        };
        Ok(EngineConfig {
            metric_set,
            preliminary_metric,
            rate: self.rate,
            phases: self.phases,
            mode: self.plan_mode(),
            controller: ControllerConfig::new(self.tau)?,
            learner: self.learner,
            selection: SelectionRule::Constrained,
            oracle,
            blinding_seed: self.blinding_seed,
            aspects: self.aspects.clone(),
            scale: self.likert,
        })
    }
}
