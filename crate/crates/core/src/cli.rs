//! `casf` command line: offline simulation, the file-based live workflow and
//! the annotation service.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ModeName, RunConfig};
use crate::dataset::{load_with_sidecar, Dataset};
use crate::engine::{AnnotationRecord, DatasetRef, Engine, EngineConfig, OracleKind, Status};
use crate::error::{Error, Result};
use crate::evaluation::{
    ablation_subset, build_report, heuristic_baseline, random_baseline, AblationMode,
    HeuristicSubset, MethodRuns, RandomRun, RankingReport,
};
use crate::session::{load_session_dataset, Session, StateLock};

#[derive(Debug, Parser)]
#[command(name = "casf", version, about = "Constrained active sampling for human evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run CASF with the simulated oracle plus baselines and write a report.
    Simulate(RunArgs),
    /// Create a live session state file.
    PhaseInit {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        state: StateArg,
    },
    /// Run the next selection phase and write its batch file.
    PhaseNext {
        #[command(flatten)]
        state: StateArg,
        /// Directory for batch files; defaults to the state file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge annotation records (a JSON array) into the session.
    Ingest {
        #[command(flatten)]
        state: StateArg,
        #[arg(long)]
        file: PathBuf,
    },
    /// Summarize a live session: annotated rankings and, when the dataset
    /// has human scores, agreement with the full dataset.
    Report {
        #[command(flatten)]
        state: StateArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the live session over HTTP.
    Serve {
        #[command(flatten)]
        state: StateArg,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Defaults to the run configuration's port.
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct StateArg {
    /// Session state file.
    #[arg(long = "state", env = "CASF_STATE", default_value = "casf_state.json")]
    pub path: PathBuf,
}

/// Flags mirroring [`RunConfig`] keys. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Metric sidecar: metric -> sample -> system -> score.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
    #[arg(long)]
    pub preliminary_metric: Option<String>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub phases: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub preliminary_ratio: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub heuristic_seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub ablations: Option<Vec<AblationArg>>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub likert_min: Option<f64>,
    #[arg(long)]
    pub likert_max: Option<f64>,
    #[arg(long)]
    pub blinding_seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub aspects: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ModeArg {
    Average,
    PreliminaryFixed,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum AblationArg {
    EightMetric,
    SingleMetric,
    Online,
}

impl From<AblationArg> for AblationMode {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::EightMetric => AblationMode::EightMetric,
            AblationArg::SingleMetric => AblationMode::SingleMetric,
            AblationArg::Online => AblationMode::Online,
        }
    }
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($field:ident => $target:expr) => {
                if let Some(v) = &self.$field {
                    $target = v.clone();
                }
            };
        }
        if self.data.is_some() {
            c.data = self.data.clone();
        }
        if self.sidecar.is_some() {
            c.sidecar = self.sidecar.clone();
        }
        if self.preliminary_metric.is_some() {
            c.preliminary_metric = self.preliminary_metric.clone();
        }
        if self.preliminary_ratio.is_some() {
            c.preliminary_ratio = self.preliminary_ratio;
        }
        set!(metrics => c.metric_set);
        set!(rate => c.rate);
        set!(phases => c.phases);
        set!(tau => c.tau);
        set!(seeds => c.seeds);
        set!(heuristic_seeds => c.heuristic_seeds);
        set!(n_trees => c.learner.n_trees);
        set!(max_depth => c.learner.max_depth);
        set!(learning_rate => c.learner.learning_rate);
        set!(min_samples_leaf => c.learner.min_samples_leaf);
        set!(out => c.out_dir);
        set!(alpha => c.alpha);
        set!(likert_min => c.likert.min);
        set!(likert_max => c.likert.max);
        set!(blinding_seed => c.blinding_seed);
        set!(aspects => c.aspects);
        if let Some(m) = self.mode {
            c.mode = match m {
                ModeArg::Average => ModeName::Average,
                ModeArg::PreliminaryFixed => ModeName::PreliminaryFixed,
            };
        }
        if let Some(a) = &self.ablations {
            c.ablations = a.iter().map(|&m| m.into()).collect();
        }
        c.validate()?;
        Ok(c)
    }
}

fn load_data(c: &RunConfig) -> Result<(Dataset, DatasetRef)> {
    let data = c
        .data
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("no dataset given (--data)".into()))?;
    let d = load_with_sidecar(data, c.sidecar.as_deref())?;
    let absolute = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let dataset_ref = DatasetRef {
        path: Some(absolute(data)),
        sidecar: c.sidecar.as_deref().map(absolute),
        digest: d.digest(),
    };
    Ok((d, dataset_ref))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn config_digest(config: &EngineConfig) -> String {
    let json = serde_json::to_string(config).expect("config always serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Serialize)]
pub struct Baselines {
    pub random: Vec<RandomRun>,
    pub heuristic: Vec<HeuristicSubset>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ablations: Vec<(AblationMode, Vec<String>)>,
}

/// Everything `simulate` writes.
#[derive(Debug)]
pub struct SimulationArtifacts {
    pub selection: crate::engine::SelectionResult,
    pub baselines: Baselines,
    pub report: RankingReport,
}

fn ablation_label(mode: AblationMode) -> &'static str {
    match mode {
        AblationMode::EightMetric => "8M",
        AblationMode::SingleMetric => "SM",
        AblationMode::Online => "OL",
    }
}

/// The comparison pipeline behind `simulate`, without file output.
pub fn simulate(d: &Dataset, c: &RunConfig, dataset_name: &str) -> Result<SimulationArtifacts> {
    let config = c.engine_config(d, OracleKind::Simulated)?;
    let selection = Engine::new(d, config.clone())?.run_simulation()?;
    let random = random_baseline(d, c.rate, &c.seeds)?;
    let heuristic = c
        .heuristic_seeds
        .iter()
        .map(|&seed| heuristic_baseline(d, c.rate, seed))
        .collect::<Result<Vec<_>>>()?;
    // report order follows the paper's table: 8M, SM, OL
    let ablations = [AblationMode::EightMetric, AblationMode::SingleMetric, AblationMode::Online]
        .into_iter()
        .filter(|m| c.ablations.contains(m))
        .map(|m| Ok((m, ablation_subset(d, &config, m)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut runs = Vec::new();
    if !random.is_empty() {
        runs.push(MethodRuns::seeded(
            "R",
            random.iter().map(|r| (r.seed, r.subset.clone())).collect(),
        ));
    }
    if !heuristic.is_empty() {
        runs.push(MethodRuns::seeded(
            "H",
            heuristic.iter().map(|h| (h.seed, h.subset.clone())).collect(),
        ));
    }
    for (m, subset) in &ablations {
        runs.push(MethodRuns::single(ablation_label(*m), subset.clone()));
    }
    runs.push(MethodRuns::single("CASF", selection.final_subset.clone()));
    let mut report = build_report(d, dataset_name, &config_digest(&config), &runs, Some(c.alpha))?;
    if heuristic.iter().any(|h| h.fallback) {
        report
            .footnotes
            .push("H: a length decile was smaller than its quota and was widened".into());
    }
    Ok(SimulationArtifacts {
        selection,
        baselines: Baselines {
            random,
            heuristic,
            ablations,
        },
        report,
    })
}

fn cmd_simulate(args: &RunArgs) -> Result<String> {
    let c = args.resolve()?;
    let (d, dataset_ref) = load_data(&c)?;
    let name = dataset_ref
        .path
        .as_deref()
        .and_then(Path::file_stem)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let a = simulate(&d, &c, &name)?;
    fs::create_dir_all(&c.out_dir).map_err(|e| Error::io(&c.out_dir, e))?;
    write_json(&c.out_dir.join("selection.json"), &a.selection)?;
    write_json(&c.out_dir.join("baselines.json"), &a.baselines)?;
    fs::write(c.out_dir.join("report.json"), a.report.to_json() + "\n")
        .map_err(|e| Error::io(c.out_dir.join("report.json"), e))?;
    fs::write(c.out_dir.join("report.md"), a.report.to_markdown())
        .map_err(|e| Error::io(c.out_dir.join("report.md"), e))?;
    let overall = a
        .report
        .aggregate("CASF")
        .map(|g| g.mean_tau.to_string())
        .unwrap_or_default();
    Ok(format!(
        "selected {} of {} samples; CASF overall tau {overall}; wrote {}",
        a.selection.final_subset.len(),
        d.len(),
        c.out_dir.display()
    ))
}

fn cmd_phase_init(args: &RunArgs, state: &Path) -> Result<String> {
    let c = args.resolve()?;
    let (d, dataset_ref) = load_data(&c)?;
    let config = c.engine_config(&d, OracleKind::Live)?;
    let _lock = StateLock::acquire(state)?;
    let session = Session::create(&d, dataset_ref, config, state)?;
    Ok(format!(
        "initialized {}: {} samples, phase quotas {:?}",
        state.display(),
        d.len(),
        session.state().plan.quotas
    ))
}

fn cmd_phase_next(state: &Path, out: Option<&Path>) -> Result<String> {
    let _lock = StateLock::acquire(state)?;
    let (st, d) = load_session_dataset(state)?;
    let mut session = Session::open(&d, st, state)?;
    let out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| state.parent().map(Path::to_path_buf).unwrap_or_default());
    let out_dir = if out_dir.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        out_dir
    };
    match session.state().status {
        Status::Complete => {
            let path = out_dir.join("final_subset.json");
            write_json(&path, &session.result())?;
            Ok(format!("complete: final subset written to {}", path.display()))
        }
        Status::AwaitingAnnotation => {
            let pending = session.pending_ids();
            Ok(format!(
                "awaiting_annotation: {} of {} samples in phase {} still need scores: {}",
                pending.len(),
                session.summary().total,
                session.state().phase.unwrap_or(0),
                pending.join(", ")
            ))
        }
        Status::ReadyToSelect => {
            let batch = session.advance()?;
            fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let path = out_dir.join(format!("batch_phase_{}.json", batch.phase));
            write_json(&path, &batch)?;
            Ok(format!(
                "phase {}: {} samples written to {}",
                batch.phase,
                batch.items.len(),
                path.display()
            ))
        }
    }
}

fn cmd_ingest(state: &Path, file: &Path) -> Result<String> {
    let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let records: Vec<AnnotationRecord> = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", file.display())))?;
    let _lock = StateLock::acquire(state)?;
    let (st, d) = load_session_dataset(state)?;
    let mut session = Session::open(&d, st, state)?;
    let s = session.ingest(&records)?;
    Ok(format!(
        "{}: {} of {} samples pending in phase {}",
        s.status.as_str(),
        s.pending,
        s.total,
        s.phase.unwrap_or(0)
    ))
}

fn cmd_report(state: &Path, alpha: f64, out: Option<&Path>) -> Result<String> {
    let (st, d) = load_session_dataset(state)?;
    let session = Session::open(&d, st, state)?;
    let report = session.report(alpha)?;
    if let Some(p) = out {
        write_json(p, &report)?;
    }
    let mut text = format!(
        "status {}; {} selected, {} annotated\n",
        report.status.as_str(),
        report.selected.len(),
        report.annotated
    );
    for m in &report.system_means {
        let mut ranked: Vec<_> = m.means.iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(a.1).then(a.0.cmp(b.0)));
        let line: Vec<String> = ranked.iter().map(|(s, v)| format!("{s} {v:.3}")).collect();
        text.push_str(&format!("{}: {}\n", m.aspect, line.join(" > ")));
    }
    if let Some(a) = &report.agreement {
        text.push('\n');
        text.push_str(&a.to_markdown());
    }
    Ok(text.trim_end().to_string())
}

fn cmd_serve(state: &Path, host: &str, port: u16) -> Result<String> {
    let lock = StateLock::acquire(state)?;
    let (st, d) = load_session_dataset(state)?;
    // the service owns the dataset for the rest of the process
    let d: &'static Dataset = Box::leak(Box::new(d));
    let session = Session::open(d, st, state)?;
    let addr = format!("{host}:{port}");
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io(state, e))?;
    runtime.block_on(crate::service::serve(session, &addr))?;
    drop(lock);
    Ok("service stopped".into())
}

/// Runs one command and returns its summary line.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::PhaseInit { run, state } => cmd_phase_init(run, &state.path),
        Command::PhaseNext { state, out } => cmd_phase_next(&state.path, out.as_deref()),
        Command::Ingest { state, file } => cmd_ingest(&state.path, file),
        Command::Report { state, alpha, out } => cmd_report(&state.path, *alpha, out.as_deref()),
        Command::Serve {
            state,
            host,
            port,
            config,
        } => {
            let c = match config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            cmd_serve(&state.path, host, port.unwrap_or(c.port))
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
/// Errors print as one line on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}
