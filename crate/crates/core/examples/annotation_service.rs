//! The HTTP annotation service exercised in-process: fetch the session,
//! advance a phase, fetch the blinded batch and post scores.
//!
//! cargo run --example annotation_service

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use casf::engine::{DatasetRef, OracleKind};
use casf::service::router;
use casf::session::Session;
use casf::synth::{generate, synthetic_config, SynthParams};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .expect("valid request");
    let resp = app.clone().oneshot(req).await.expect("router is infallible");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

pub fn run_example() -> casf::Result<Vec<(String, StatusCode, Value)>> {
    let d: &'static casf::Dataset = Box::leak(Box::new(
        generate(&SynthParams { n_samples: 40, ..SynthParams::default() }, 2)?.dataset,
    ));
    let dir = tempfile::tempdir().map_err(|e| casf::Error::InvalidInput(e.to_string()))?;
    let config = casf::EngineConfig {
        oracle: OracleKind::Live,
        phases: 2,
        rate: 0.25,
        ..synthetic_config()
    };
    let session = Session::create(d, DatasetRef::default(), config, &dir.path().join("state.json"))?;
    let app = router(Arc::new(RwLock::new(session)));

    let rt = tokio::runtime::Builder::new_current_thread()
        .build()
        .map_err(|e| casf::Error::InvalidInput(e.to_string()))?;
    Ok(rt.block_on(async {
        let mut log = Vec::new();
        let mut record = |name: &str, (s, v): (StatusCode, Value)| {
            log.push((name.to_string(), s, v.clone()));
            v
        };
        record("session", call(&app, "GET", "/api/session", Value::Null).await);
        record("advance", call(&app, "POST", "/api/phase/advance", Value::Null).await);
        let batch = record("batch", call(&app, "GET", "/api/batch", Value::Null).await);
        let first = &batch["items"][0];
        let scores: Vec<Value> = first["outputs"]
            .as_array()
            .expect("outputs")
            .iter()
            .map(|o| {
                json!({
                    "sample_id": first["sample_id"],
                    "blinded_label": o["label"],
                    "scores": {"coherence": 4, "relevance": 3}
                })
            })
            .collect();
        record("scores", call(&app, "POST", "/api/scores", Value::Array(scores)).await);
        record("advance early", call(&app, "POST", "/api/phase/advance", Value::Null).await);
        let bad = json!([{"sample_id": "nope", "blinded_label": "System 1", "scores": {"coherence": 3}}]);
        record("bad sample", call(&app, "POST", "/api/scores", bad).await);
        log
    }))
}

fn main() -> casf::Result<()> {
    for (name, status, body) in run_example()? {
        let text = body.to_string();
        let short: String = text.chars().take(100).collect();
        println!("{name:14} {status} {short}");
    }
    Ok(())
}
