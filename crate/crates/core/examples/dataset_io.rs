//! Load a JSONL dataset with a metric sidecar, check metric coverage and
//! write it back out.
//!
//! cargo run --example dataset_io

use std::fs;

use casf::dataset::{load_with_sidecar, validate};

const DATA: &str = r#"{"sample_id":"x1","source":"doc one","references":["the cat sat"],"outputs":{"A":"the cat sat","B":"a cat sat"}}
{"sample_id":"x2","source":"doc two","references":["the dog ran"],"outputs":{"A":"dog ran","B":"the dog ran"}}
"#;

const SIDECAR: &str = r#"{"mover_score":{"x1":{"A":0.61,"B":0.55},"x2":{"A":0.40,"B":0.66}},
 "bert_score":{"x1":{"A":0.9,"B":0.8}}}"#;

pub fn run_example() -> casf::Result<(usize, Vec<String>, String)> {
    let dir = tempfile::tempdir().map_err(|e| casf::Error::InvalidInput(e.to_string()))?;
    let data = dir.path().join("data.jsonl");
    let sidecar = dir.path().join("metrics.json");
    fs::write(&data, DATA).expect("temp dir is writable");
    fs::write(&sidecar, SIDECAR).expect("temp dir is writable");

    let d = load_with_sidecar(&data, Some(&sidecar))?;
    let report = validate(&d, &["mover_score".to_string(), "bert_score".to_string()]);
    let problems = report
        .errors
        .iter()
        .map(|(id, msg)| format!("{id}: {msg}"))
        .collect();
    Ok((d.len(), problems, d.digest()))
}

fn main() -> casf::Result<()> {
    let (n, problems, digest) = run_example()?;
    println!("{n} samples, digest {digest}");
    for p in problems {
        println!("missing: {p}");
    }
    Ok(())
}
