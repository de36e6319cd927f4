use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use trowel::search::{Index, SharedIndex};
use trowel_server::{router, ErrorBody, Health, ServerOptions};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn app() -> Router {
    router(Arc::new(SharedIndex::new(Index::new())), &ServerOptions::default())
}

async fn call(app: &Router, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.into())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn error(v: &Value) -> ErrorBody {
    serde_json::from_value(v.clone()).expect("error body is {code, message}")
}

#[tokio::test]
async fn index_then_search_the_figure_query() {
    let app = app();
    let (status, v) = call(&app, Method::GET, "/health", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let h: Health = serde_json::from_value(v).unwrap();
    assert_eq!((h.status.as_str(), h.pages), ("ok", 0));

    let (status, v) = call(&app, Method::POST, "/index", fixture("fig1_pages.jsonl")).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v, json!({"indexed": 3, "replaced": 0, "total_pages": 3}));

    let (status, v) = call(&app, Method::POST, "/search", fixture("fig1_query.json")).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["total"], 1);
    assert_eq!(v["hits"][0]["doc_id"], "ads-0412");
    assert_eq!(v["hits"][0]["page_no"], 7);
    assert!(v["hits"][0]["snippet"].as_str().unwrap().contains("<em>"));
    assert!(v["facets"].is_object());

    let (_, v) = call(&app, Method::GET, "/health", Body::empty()).await;
    assert_eq!(v["pages"], 3);
}

#[tokio::test]
async fn index_accepts_arrays_and_reports_replacements() {
    let app = app();
    let body = json!([{"doc_id": "a", "page_no": 1, "text": "urn"}, {"doc_id": "a", "page_no": 1, "text": "pot"}]);
    let (status, v) = call(&app, Method::POST, "/index", body.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, json!({"indexed": 2, "replaced": 1, "total_pages": 1}));
    let (_, v) = call(&app, Method::POST, "/search", r#"{"fulltext":"pot"}"#).await;
    assert_eq!(v["total"], 1);
}

#[tokio::test]
async fn empty_query_lists_everything() {
    let app = app();
    call(&app, Method::POST, "/index", fixture("fig1_pages.jsonl")).await;
    let (status, v) = call(&app, Method::POST, "/search", "{}").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["total"], 3);
    assert!(v["hits"].as_array().unwrap().iter().all(|h| h["score"] == 0.0));
}

#[tokio::test]
async fn errors_are_structured() {
    let app = app();
    let cases: [(Method, &str, &str, StatusCode, &str); 7] = [
        (Method::POST, "/search", "{not json", StatusCode::BAD_REQUEST, "invalid_query"),
        (Method::POST, "/search", r#"{"colour":"red"}"#, StatusCode::BAD_REQUEST, "invalid_query"),
        (Method::POST, "/search", r#"{"page":{"size":0}}"#, StatusCode::BAD_REQUEST, "invalid_query"),
        (Method::POST, "/index", "[{\"doc_id\":\"a\"}]", StatusCode::BAD_REQUEST, "invalid_json"),
        (Method::POST, "/index", r#"[{"doc_id":"a","page_no":0,"text":""}]"#, StatusCode::UNPROCESSABLE_ENTITY, "invalid_record"),
        (Method::GET, "/nowhere", "", StatusCode::NOT_FOUND, "not_found"),
        (Method::GET, "/search", "", StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed"),
    ];
    for (method, uri, body, status, code) in cases {
        let (got, v) = call(&app, method.clone(), uri, body.to_string()).await;
        assert_eq!(got, status, "{method} {uri} {body}");
        let e = error(&v);
        assert_eq!(e.code, code, "{method} {uri} {body}");
        assert!(!e.message.is_empty());
    }
    // rejected batches leave the index untouched
    let (_, v) = call(&app, Method::GET, "/health", Body::empty()).await;
    assert_eq!(v["pages"], 0);
}

#[tokio::test]
async fn oversized_bodies_are_rejected() {
    let options = ServerOptions {
        max_body_bytes: 16,
        ..ServerOptions::default()
    };
    let app = router(Arc::new(SharedIndex::new(Index::new())), &options);
    let (status, v) = call(&app, Method::POST, "/search", r#"{"fulltext":"a rather long query"}"#).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(error(&v).code, "payload_too_large");
}

#[tokio::test]
async fn cors_preflight_is_answered() {
    let app = app();
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/search")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.status().is_success());
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}

#[tokio::test]
async fn persisted_index_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(SharedIndex::open(dir.path()).unwrap()), &ServerOptions::default());
    call(&app, Method::POST, "/index", fixture("fig1_pages.jsonl")).await;
    let again = router(Arc::new(SharedIndex::open(dir.path()).unwrap()), &ServerOptions::default());
    let (_, v) = call(&again, Method::GET, "/health", Body::empty()).await;
    assert_eq!(v["pages"], 3);
}
