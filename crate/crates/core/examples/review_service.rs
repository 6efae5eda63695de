//! Operator review round trip against the HTTP API, driven in-process.
//!
//! Uploads a fixture card, lists the review queue, submits a correction and
//! shows that a stale revision is refused. With `--listen PORT` it instead
//! serves the API on localhost until interrupted.
//!
//! ```text
//! cargo run --example review_service
//! cargo run --example review_service -- --listen 8080
//! ```

use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use ktpx::pipeline::{Pipeline, PipelineConfig};
use ktpx::service::{router, serve, AppState};
use ktpx::store::{Store, StoredResult};
use serde_json::{json, Value};
use tower::ServiceExt;

const BOUNDARY: &str = "ktpx-example-boundary";

fn multipart(image: &[u8], dump: &str) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(
        format!("--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"image\"; filename=\"card.png\"\r\nContent-Type: image/png\r\n\r\n")
            .as_bytes(),
    );
    body.extend_from_slice(image);
    body.extend_from_slice(
        format!(
            "\r\n--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"ocr_dump\"\r\n\r\n{dump}\r\n--{BOUNDARY}--\r\n"
        )
        .as_bytes(),
    );
    body
}

async fn call(app: &axum::Router, req: Request<Body>) -> anyhow::Result<(StatusCode, Value)> {
    let resp = app.clone().oneshot(req).await?;
    let status = resp.status();
    let bytes = resp.into_body().collect().await?.to_bytes();
    Ok((status, serde_json::from_slice(&bytes)?))
}

fn post_json(uri: &str, body: &Value) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .expect("valid request")
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let pipeline = Pipeline::new(PipelineConfig::default())?;
    if let [flag, port] = args.as_slice() {
        anyhow::ensure!(flag == "--listen", "usage: review_service [--listen PORT]");
        let store = Store::open(&std::env::temp_dir().join("ktpx-review.jsonl"))?;
        let addr = ([127, 0, 0, 1], port.parse()?).into();
        println!("serving on http://{addr}");
        serve(AppState::new(pipeline, store), addr).await?;
        return Ok(());
    }

    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let app = router(AppState::new(pipeline, Store::in_memory()));

    let body = multipart(
        &std::fs::read(fixtures.join("card02.png"))?,
        &std::fs::read_to_string(fixtures.join("card02.tsv"))?,
    );
    let req = Request::post("/v1/extract")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(body))?;
    let (status, v) = call(&app, req).await?;
    let stored: StoredResult = serde_json::from_value(v)?;
    println!(
        "POST /v1/extract -> {status}, status {:?}, flagged {:?}",
        stored.status, stored.flagged_fields
    );

    let (_, queue) = call(&app, Request::get("/v1/review/queue").body(Body::empty())?).await?;
    println!(
        "GET /v1/review/queue -> {} record(s)",
        queue.as_array().map_or(0, Vec::len)
    );

    let uri = format!("/v1/records/{}/corrections", stored.record_id);
    let edit = json!({"revision": stored.revision, "corrections": {"name": stored.record.name}});
    let (status, v) = call(&app, post_json(&uri, &edit)).await?;
    println!(
        "POST corrections at revision {} -> {status}, now {} / revision {}",
        stored.revision, v["status"], v["revision"]
    );

    let (status, v) = call(&app, post_json(&uri, &edit)).await?;
    println!("same revision again -> {status}: {}", v["message"]);
    Ok(())
}
