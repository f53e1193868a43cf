//! A persisted live-annotation session: engine state on disk plus the
//! dataset it refers to. Every mutating call writes the state file before it
//! returns, so an acknowledged change survives a crash.

use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{load_with_sidecar, Dataset};
use crate::engine::{
    AnnotationRecord, BatchItem, DatasetRef, Engine, EngineConfig, EngineState, LikertScale,
    SelectionResult, Status,
};
use crate::error::{Error, Result};
use crate::evaluation::{build_report, MethodRuns, RankingReport, SystemMeans};

/// Exclusive writer lock: a sibling `<state>.lock` file created with
/// `create_new`, removed on drop.
#[derive(Debug)]
pub struct StateLock {
    path: PathBuf,
}

impl StateLock {
    pub fn acquire(state_path: &Path) -> Result<Self> {
        let mut name = state_path.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        let mut file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => Error::Locked(path.clone()),
                _ => Error::io(&path, e),
            })?;
        let _ = writeln!(file, "{}", std::process::id());
        Ok(StateLock { path })
    }
}

impl Drop for StateLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectScale {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Progress of the current phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub phase: Option<usize>,
    pub phase_count: usize,
    pub pending: usize,
    pub total: usize,
    pub selected: usize,
    pub status: Status,
    pub aspects: Vec<AspectScale>,
    pub scale: LikertScale,
}

/// Current phase items as written by `phase-next` and served on /api/batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFile {
    pub phase: usize,
    pub aspects: Vec<String>,
    pub scale: LikertScale,
    pub items: Vec<BatchItem>,
}

/// System rankings from the session's own annotations, plus agreement with
/// the full dataset when it carries human scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub status: Status,
    pub selected: Vec<String>,
    pub annotated: usize,
    pub system_means: Vec<SystemMeans>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<RankingReport>,
}

pub struct Session<'d> {
    engine: Engine<'d>,
    state: EngineState,
    path: PathBuf,
}

/// Loads the dataset a state file refers to.
pub fn load_session_dataset(state_path: &Path) -> Result<(EngineState, Dataset)> {
    let state = EngineState::load(state_path)?;
    let data = state
        .dataset
        .path
        .as_deref()
        .ok_or_else(|| Error::CorruptState("state does not record a dataset path".into()))?;
    let d = load_with_sidecar(data, state.dataset.sidecar.as_deref())?;
    Ok((state, d))
}

impl<'d> Session<'d> {
    /// Starts a new session. Refuses to overwrite an existing state file.
    pub fn create(
        dataset: &'d Dataset,
        dataset_ref: DatasetRef,
        config: EngineConfig,
        path: &Path,
    ) -> Result<Self> {
        if path.exists() {
            return Err(Error::InvalidInput(format!(
                "{} already exists; remove it to start over",
                path.display()
            )));
        }
        let engine = Engine::new(dataset, config)?;
        let mut state = engine.fresh_state();
        state.dataset = DatasetRef {
            digest: state.dataset.digest,
            ..dataset_ref
        };
        state.save(path)?;
        Ok(Session {
            engine,
            state,
            path: path.to_path_buf(),
        })
    }

    pub fn open(dataset: &'d Dataset, state: EngineState, path: &Path) -> Result<Self> {
        Ok(Session {
            engine: Engine::for_state(dataset, &state)?,
            state,
            path: path.to_path_buf(),
        })
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn engine(&self) -> &Engine<'d> {
        &self.engine
    }

    pub fn scale(&self) -> LikertScale {
        self.state.config.scale
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            phase: self.state.phase,
            phase_count: self.state.plan.phase_count,
            pending: self.engine.pending(&self.state).len(),
            total: self.state.current_phase_ids().len(),
            selected: self.state.selected.len(),
            status: self.state.status,
            aspects: self
                .engine
                .aspects()
                .iter()
                .map(|a| AspectScale {
                    name: a.clone(),
                    min: self.scale().min,
                    max: self.scale().max,
                })
                .collect(),
            scale: self.scale(),
        }
    }

    pub fn pending_ids(&self) -> Vec<String> {
        self.engine.pending(&self.state)
    }

    pub fn batch(&self, pending_only: bool) -> Option<BatchFile> {
        Some(BatchFile {
            phase: self.state.phase?,
            aspects: self.engine.aspects().to_vec(),
            scale: self.scale(),
            items: self.engine.batch(&self.state, pending_only),
        })
    }

    fn commit(&mut self, next: EngineState) -> Result<()> {
        if next != self.state {
            next.save(&self.path)?;
            self.state = next;
        }
        Ok(())
    }

    /// Runs the next selection phase and returns its batch.
    pub fn advance(&mut self) -> Result<BatchFile> {
        if self.state.status != Status::ReadyToSelect {
            return Err(Error::WrongStatus {
                expected: Status::ReadyToSelect.as_str(),
                actual: self.state.status.as_str(),
            });
        }
        let next = self.engine.advance(&self.state)?;
        self.commit(next)?;
        Ok(self.batch(false).expect("a phase has run"))
    }

    pub fn ingest(&mut self, records: &[AnnotationRecord]) -> Result<SessionSummary> {
        let next = self.engine.ingest_annotations(&self.state, records)?;
        self.commit(next)?;
        Ok(self.summary())
    }

    pub fn result(&self) -> SelectionResult {
        self.engine.result(&self.state)
    }

    pub fn report(&self, alpha: f64) -> Result<SessionReport> {
        let d = self.engine.dataset();
        let selected = self.state.selected_ids();
        let annotated: Vec<String> = selected
            .iter()
            .filter(|id| self.state.is_annotated(id, d.systems(), self.engine.aspects()))
            .cloned()
            .collect();

        // rankings from the annotations themselves, over annotated samples
        let mut system_means_out = Vec::new();
        if !annotated.is_empty() {
            for aspect in self.engine.aspects() {
                let mut means = std::collections::BTreeMap::new();
                for sys in d.systems() {
                    let total: f64 = annotated
                        .iter()
                        .map(|id| self.state.annotations[id][sys][aspect])
                        .sum();
                    means.insert(sys.clone(), total / annotated.len() as f64);
                }
                system_means_out.push(SystemMeans {
                    aspect: aspect.clone(),
                    means,
                });
            }
        }

        let agreement = if d.has_complete_human_scores() && !d.aspects().is_empty() && !selected.is_empty() {
            Some(build_report(
                d,
                &dataset_label(&self.state),
                &self.state.dataset.digest,
                &[MethodRuns::single("CASF", selected.clone())],
                Some(alpha),
            )?)
        } else {
            None
        };

        Ok(SessionReport {
            status: self.state.status,
            selected,
            annotated: annotated.len(),
            system_means: system_means_out,
            agreement,
        })
    }
}

fn dataset_label(state: &EngineState) -> String {
    state
        .dataset
        .path
        .as_deref()
        .and_then(Path::file_stem)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}
