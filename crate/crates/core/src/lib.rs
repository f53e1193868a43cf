//! Constrained active sampling: pick a small, representative subset of an
//! evaluation dataset for human judgment of text generation systems.
//!
//! A preliminary phase ranks samples by one automatic metric; later phases
//! rank the remaining pool with a gradient-boosted regressor trained on the
//! samples annotated so far. Each phase splits its ranking into equal-width
//! buckets and a redundancy controller picks one sample per bucket.

pub mod cli;
pub mod config;
pub mod controller;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod learner;
pub mod sampler;
pub mod service;
pub mod session;
pub mod synth;
pub mod text_metrics;

pub use config::RunConfig;
pub use dataset::{load_dataset, load_with_sidecar, Dataset, DatasetFormat, Sample};
pub use engine::{run_simulation, Engine, EngineConfig, EngineState, SelectionResult};
pub use error::{Error, Result};
