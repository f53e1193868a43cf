//! A live annotation session driven through its state file: select a phase,
//! read the blinded batch, submit scores, repeat until complete.
//!
//! The annotator here answers with the dataset's own human scores, so the
//! final subset matches a simulated run on the same data.
//!
//! cargo run --release --example live_session

use casf::engine::{AnnotationRecord, DatasetRef, OracleKind, Status};
use casf::session::Session;
use casf::synth::{generate, synthetic_config, SynthParams};
use casf::{Dataset, Engine};

fn annotate(d: &Dataset, session: &Session) -> Vec<AnnotationRecord> {
    let phase = session.state().phase.expect("a phase has run");
    let order = &session.state().blinding[&phase];
    let mut records = Vec::new();
    for item in session.batch(true).expect("a phase has run").items {
        let sample = d.sample(&item.sample_id).expect("batch ids come from the dataset");
        for out in &item.outputs {
            let index: usize = out.label["System ".len()..].parse().expect("blinded label");
            let system = &order[index - 1];
            let scores = d
                .aspects()
                .iter()
                .map(|a| (a.clone(), sample.human_score(system, a).expect("complete scores")))
                .collect();
            records.push(AnnotationRecord {
                sample_id: item.sample_id.clone(),
                blinded_label: out.label.clone(),
                scores,
            });
        }
    }
    records
}

pub fn run_example() -> casf::Result<(Vec<String>, Vec<String>)> {
    let params = SynthParams { n_samples: 80, ..SynthParams::default() };
    let d = generate(&params, 5)?.dataset;
    let mut config = synthetic_config();
    config.phases = 3;
    // synthetic scores are unbounded
    config.scale.min = -100.0;
    config.scale.max = 100.0;

    let dir = tempfile::tempdir().map_err(|e| casf::Error::InvalidInput(e.to_string()))?;
    let state_path = dir.path().join("state.json");
    let live = casf::EngineConfig { oracle: OracleKind::Live, ..config.clone() };
    let mut session = Session::create(&d, DatasetRef::default(), live, &state_path)?;

    while session.state().status != Status::Complete {
        let batch = session.advance()?;
        println!("phase {}: {} samples to annotate", batch.phase, batch.items.len());
        let records = annotate(&d, &session);
        let summary = session.ingest(&records)?;
        println!("  -> {}", summary.status.as_str());
    }

    let simulated = Engine::new(&d, config)?.run_simulation()?.final_subset;
    Ok((session.state().selected_ids(), simulated))
}

fn main() -> casf::Result<()> {
    let (live, simulated) = run_example()?;
    println!("live subset ({}): {:?}", live.len(), live);
    println!("matches simulated run: {}", live == simulated);
    Ok(())
}
