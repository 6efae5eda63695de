mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use common::{fixed_date, fixtures};
use http_body_util::BodyExt;
use ktpx::pipeline::{Pipeline, PipelineConfig};
use ktpx::schema::RECORD_KEYS;
use ktpx::service::{router, AppState};
use ktpx::store::{record_id, ReviewStatus, Store, StoredResult};
use serde_json::{json, Value};
use tower::ServiceExt;

const BOUNDARY: &str = "XyZboundary42";

fn app_with(config: PipelineConfig, store: Store) -> Router {
    router(AppState::new(Pipeline::new(config).unwrap(), store))
}

fn config(review_threshold: u8) -> PipelineConfig {
    PipelineConfig {
        fixed_date: Some(fixed_date()),
        confidence_review_threshold: review_threshold,
        ..PipelineConfig::default()
    }
}

fn card(id: &str) -> (Vec<u8>, String) {
    (
        std::fs::read(fixtures().join(format!("{id}.png"))).unwrap(),
        std::fs::read_to_string(fixtures().join(format!("{id}.tsv"))).unwrap(),
    )
}

fn upload(image: &[u8], dump: Option<&str>) -> Request<Body> {
    let mut body = Vec::new();
    body.extend_from_slice(
        format!("--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"image\"; filename=\"c.png\"\r\n\r\n")
            .as_bytes(),
    );
    body.extend_from_slice(image);
    body.extend_from_slice(b"\r\n");
    if let Some(d) = dump {
        body.extend_from_slice(
            format!("--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"ocr_dump\"\r\n\r\n{d}\r\n").as_bytes(),
        );
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    Request::post("/v1/extract")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(body))
        .unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn correction(id: &str, revision: u64, edits: Value) -> Request<Body> {
    Request::post(format!("/v1/records/{id}/corrections"))
        .header("content-type", "application/json")
        .body(Body::from(
            json!({"revision": revision, "corrections": edits}).to_string(),
        ))
        .unwrap()
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn stored(v: Value) -> StoredResult {
    serde_json::from_value(v).unwrap()
}

#[tokio::test]
async fn review_round_trip_persists() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("events.jsonl");
    let app = app_with(config(85), Store::open(&log).unwrap());
    let (png, dump) = card("card02");

    let (status, v) = call(&app, upload(&png, Some(&dump))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["record"].as_object().unwrap().len(), RECORD_KEYS.len());
    let first = stored(v);
    assert_eq!(first.record_id, record_id(&png));
    assert_eq!(first.status, ReviewStatus::PendingReview);
    assert!(first.flagged_fields.contains(&"religion".to_string()));

    let (_, queue) = call(&app, get("/v1/review/queue")).await;
    let ids: Vec<&str> = queue
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["record_id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, [first.record_id.as_str()]);

    let (status, v) = call(&app, get(&format!("/v1/records/{}", first.record_id))).await;
    assert_eq!((status, stored(v)), (StatusCode::OK, first.clone()));

    let (status, v) = call(&app, correction(&first.record_id, 0, json!({"identifier": "12345"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "validation");

    let (status, v) = call(&app, correction(&first.record_id, 0, json!({"name": "SITI AMINAH"}))).await;
    assert_eq!(status, StatusCode::OK);
    let after = stored(v);
    assert_eq!(
        (after.status, after.revision, after.record.name.as_str()),
        (ReviewStatus::Reviewed, 1, "SITI AMINAH")
    );
    assert_eq!(after.corrections[0].old, first.record.name);

    let (status, v) = call(&app, correction(&first.record_id, 0, json!({"name": "X"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "revision-conflict");

    let (_, queue) = call(&app, get("/v1/review/queue")).await;
    assert_eq!(queue, json!([]));

    drop(app);
    let replayed = Store::open(&log).unwrap();
    assert_eq!(replayed.get(&first.record_id), Some(&after));
}

#[tokio::test]
async fn reupload_is_idempotent() {
    let app = app_with(config(85), Store::in_memory());
    let (png, dump) = card("card01");
    let (_, a) = call(&app, upload(&png, Some(&dump))).await;
    let (_, b) = call(&app, upload(&png, Some(&dump))).await;
    assert_eq!(a, b);
    let (_, health) = call(&app, get("/v1/health")).await;
    assert_eq!(health, json!({"status": "ok", "records": 1}));
}

#[tokio::test]
async fn unflagged_record_is_terminal() {
    let app = app_with(config(0), Store::in_memory());
    let (png, dump) = card("card03");
    let (_, v) = call(&app, upload(&png, Some(&dump))).await;
    let r = stored(v);
    assert_eq!(r.status, ReviewStatus::AutoAccepted);
    assert!(r.flagged_fields.is_empty());
    let (_, queue) = call(&app, get("/v1/review/queue")).await;
    assert_eq!(queue, json!([]));
    let (status, v) = call(&app, correction(&r.record_id, 0, json!({}))).await;
    assert_eq!(
        (status, v["error"].as_str()),
        (StatusCode::CONFLICT, Some("auto-accepted"))
    );
}

#[tokio::test]
async fn bad_requests() {
    let app = app_with(config(85), Store::in_memory());
    let (status, v) = call(&app, get("/v1/records/deadbeef")).await;
    assert_eq!(
        (status, v["error"].as_str()),
        (StatusCode::NOT_FOUND, Some("unknown-record"))
    );

    let (status, _) = call(&app, correction("deadbeef", 0, json!({}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, v) = call(&app, upload(b"definitely not an image", Some(""))).await;
    assert_eq!(
        (status, v["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("bad-image"))
    );

    let no_image = Request::post("/v1/extract")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(format!("--{BOUNDARY}--\r\n")))
        .unwrap();
    let (status, _) = call(&app, no_image).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call(&app, get("/v1/health")).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn engine_problems_map_to_gateway_errors() {
    let cfg = PipelineConfig {
        ocr_command: Some("ktpx-no-such-ocr-engine {image}".into()),
        ..config(85)
    };
    let app = app_with(cfg, Store::in_memory());
    let (png, _) = card("card01");
    let (status, v) = call(&app, upload(&png, None)).await;
    assert_eq!(
        (status, v["error"].as_str()),
        (StatusCode::SERVICE_UNAVAILABLE, Some("engine-unavailable"))
    );

    let cfg = PipelineConfig {
        ocr_command: Some("false".into()),
        ..config(85)
    };
    let app = app_with(cfg, Store::in_memory());
    let (status, _) = call(&app, upload(&png, None)).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
}

#[tokio::test]
async fn schema_describes_record() {
    let app = app_with(config(70), Store::in_memory());
    let (status, v) = call(&app, get("/v1/schema")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["review_threshold"], 70);
    let keys: Vec<&str> = v["keys"]
        .as_array()
        .unwrap()
        .iter()
        .map(|k| k.as_str().unwrap())
        .collect();
    assert_eq!(keys, RECORD_KEYS);
}
