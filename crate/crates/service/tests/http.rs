mod common;

use std::fs;
use std::sync::Arc;
use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Method as HttpMethod, Request, StatusCode};
use axum::Router;
use collate_core::similarity::Method;
use collate_service::api::{router, REVISION_HEADER};
use collate_service::{ImageEntry, ProjectService};
use common::*;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Api {
    _fixture_dir: tempfile::TempDir,
    service: Arc<ProjectService>,
    app: Router,
}

fn api(n: usize) -> Api {
    let f = fixture(21, n, 0.0, Method::Features);
    let service = ProjectService::new(f.project);
    let app = router(service.clone());
    Api {
        _fixture_dir: f.dir,
        service,
        app,
    }
}

struct Reply {
    status: StatusCode,
    header_revision: u64,
    body: Value,
    bytes: Vec<u8>,
}

async fn call(app: &Router, method: HttpMethod, uri: &str, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let response = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = response.status();
    let header_revision = response
        .headers()
        .get(REVISION_HEADER)
        .expect("revision header on every response")
        .to_str()
        .unwrap()
        .parse()
        .unwrap();
    let bytes = to_bytes(response.into_body(), usize::MAX)
        .await
        .unwrap()
        .to_vec();
    let body = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    Reply {
        status,
        header_revision,
        body,
        bytes,
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    call(app, HttpMethod::GET, uri, None).await
}

async fn post(app: &Router, uri: &str, body: Value) -> Reply {
    call(app, HttpMethod::POST, uri, Some(body)).await
}

async fn wait_for_run(app: &Router) -> Value {
    for _ in 0..2000 {
        let r = get(app, "/pairs/A/B/status").await;
        let state = r.body["run"]["state"].as_str().unwrap_or("").to_owned();
        if state == "succeeded" || state == "failed" {
            return r.body;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("run did not finish");
}

#[tokio::test]
async fn manuscripts_listing_carries_revision() {
    let t = api(6);
    let r = get(&t.app, "/manuscripts").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body["revision"], json!(t.service.revision()));
    assert_eq!(r.header_revision, t.service.revision());
    let ms = r.body["manuscripts"].as_array().unwrap();
    assert_eq!(ms.len(), 2);
    assert_eq!(ms[0]["id"], "A");
    assert_eq!(ms[0]["count"], 6);
    assert_eq!(ms[1]["illustrations"][2], "B0002");
}

#[tokio::test]
async fn review_loop_over_http() {
    let t = api(10);
    // Nothing computed yet.
    let r = get(&t.app, "/pairs/A/B/candidates/3?k=5").await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert!(r.body["error"].is_string());

    let r = post(&t.app, "/pairs/A/B/run", json!({ "stages": ["propagate"] })).await;
    assert_eq!(r.status, StatusCode::CONFLICT, "{}", r.body);

    let start = t.service.revision();
    let r = post(&t.app, "/pairs/A/B/run", json!({})).await;
    assert_eq!(r.status, StatusCode::ACCEPTED, "{}", r.body);
    assert_eq!(
        r.body["run"]["stages"],
        json!(["similarity", "normalize", "propagate", "match"])
    );
    let status = wait_for_run(&t.app).await;
    assert_eq!(status["run"]["state"], "succeeded", "{status}");
    assert_eq!(status["revision"], json!(start + 1));
    assert_eq!(status["stages"]["match"]["current"], true);

    let r = get(&t.app, "/pairs/A/B/candidates/3?k=5&mask=rejected").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body["stage"], "propagate");
    assert_eq!(r.body["query"]["illustration_id"], "A0003");
    let candidates = r.body["candidates"].as_array().unwrap();
    assert_eq!(candidates.len(), 5);
    let top = candidates[0]["index"].as_u64().unwrap() as usize;

    let r = post(&t.app, "/pairs/A/B/reject", json!({ "i": 3, "j": top })).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body["revision"], json!(start + 2));
    assert_eq!(r.body["entry"]["status"], "rejected");
    let r = get(&t.app, "/pairs/A/B/candidates/3?k=10&mask=rejected").await;
    assert!(r.body["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["index"] != json!(top)));
    let r = get(&t.app, "/pairs/A/B/candidates/3?k=10").await;
    let hit = r.body["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["index"] == json!(top))
        .cloned()
        .unwrap();
    assert_eq!(hit["status"], "rejected");

    let r = post(&t.app, "/pairs/A/B/confirm", json!({ "i": 3, "j": top })).await;
    assert_eq!(r.body["entry"]["status"], "confirmed");
    assert_eq!(r.header_revision, start + 3);

    // Re-run: only the stages that read annotations are recomputed.
    post(
        &t.app,
        "/pairs/A/B/run",
        json!({ "stages": ["similarity", "normalize", "propagate", "match"] }),
    )
    .await;
    let status = wait_for_run(&t.app).await;
    assert_eq!(
        status["run"]["report"]["computed"],
        json!(["propagate", "match"])
    );
    assert_eq!(
        status["run"]["report"]["skipped"],
        json!(["similarity", "normalize"])
    );

    let r = get(&t.app, "/pairs/A/B/matches").await;
    assert_eq!(r.status, StatusCode::OK);
    let entries = r.body["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 10);
    assert!(entries
        .iter()
        .any(|e| e["i"] == 3 && e["j"] == json!(top) && e["status"] == "confirmed"));
    assert_eq!(r.body["revision"], json!(t.service.revision()));
}

#[tokio::test]
async fn bad_requests_are_reported_with_revision() {
    let t = api(4);
    let rev = t.service.revision();
    let r = post(&t.app, "/pairs/A/B/confirm", json!({ "i": 4, "j": 0 })).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.body["revision"], json!(rev));
    let r = post(&t.app, "/pairs/A/Q/confirm", json!({ "i": 0, "j": 0 })).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    // Extractor rejections still get the header.
    let r = get(&t.app, "/pairs/A/B/candidates/notanumber").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.header_revision, rev);
    let r = get(&t.app, "/pairs/A/B/matches").await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(t.service.revision(), rev);

    t.service
        .run_blocking("A", "B", &[collate_service::Stage::Similarity])
        .unwrap();
    let r = get(&t.app, "/pairs/A/B/candidates/9").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = get(&t.app, "/pairs/A/B/candidates/0?k=0").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = get(&t.app, "/pairs/A/B/candidates/0?mask=bogus").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = get(&t.app, "/pairs/A/B/candidates/1?direction=cols&k=2").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body["query"]["illustration_id"], "B0001");
}

#[tokio::test]
async fn images_are_served_from_the_store() {
    let t = api(3);
    let dir = t.service.snapshot().dir().to_path_buf();
    fs::write(dir.join("a0.png"), b"\x89PNG").unwrap();
    t.service
        .write(|p| {
            p.set_image("A0000", ImageEntry::full("a0.png"))?;
            p.set_image("A0001", ImageEntry::missing())
        })
        .unwrap();
    let r = get(&t.app, "/images/A0000?size=thumbnail").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.bytes, b"\x89PNG");
    assert_eq!(r.header_revision, t.service.revision());
    assert_eq!(
        get(&t.app, "/images/A0001").await.status,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        get(&t.app, "/images/nope").await.status,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn reads_stay_consistent_during_a_run() {
    let t = api(24);
    let before = t.service.revision();
    let r = post(&t.app, "/pairs/A/B/run", json!({})).await;
    assert_eq!(r.status, StatusCode::ACCEPTED);
    // A second run for the same pair is refused while the first is active.
    let again = post(&t.app, "/pairs/A/B/run", json!({})).await;
    assert!(
        again.status == StatusCode::CONFLICT || again.status == StatusCode::ACCEPTED,
        "{}",
        again.status
    );
    let mut seen = Vec::new();
    loop {
        let r = get(&t.app, "/manuscripts").await;
        assert_eq!(r.body["revision"], json!(r.header_revision));
        seen.push(r.header_revision);
        let status = get(&t.app, "/pairs/A/B/status").await;
        if status.body["run"]["state"] == "succeeded" {
            break;
        }
        assert_ne!(status.body["run"]["state"], "failed");
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    assert!(seen.windows(2).all(|w| w[0] <= w[1]));
    assert!(seen.iter().all(|&r| r == before || r == before + 1));
    assert_eq!(t.service.revision(), before + 1);
}
