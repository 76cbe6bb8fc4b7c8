mod common;

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use wildrisk::cli::{session_state, Source};
use wildrisk::config::RunConfig;
use wildrisk::service::{router, SessionState};

fn workspace() -> &'static PathBuf {
    static WS: OnceLock<PathBuf> = OnceLock::new();
    WS.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap().keep();
        common::trained_workspace(&dir);
        dir
    })
}

fn state() -> Arc<SessionState> {
    let ws = workspace();
    let src = Source { region: Some(ws.join("a")), table: Some(ws.join("dyn.csv")), year: None };
    Arc::new(session_state(&RunConfig::default(), &ws.join("model.json"), &src).unwrap())
}

fn app() -> Router {
    router(state())
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post(app: &Router, body: &str) -> (StatusCode, Value) {
    let req = Request::post("/api/counterfactual").header("content-type", "application/json").body(Body::from(body.to_string())).unwrap();
    let (s, b) = send(app, req).await;
    (s, serde_json::from_slice(&b).unwrap())
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[tokio::test]
async fn healthz_is_ok() {
    let (s, b) = get(&app(), "/healthz").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(b, b"ok");
}

#[tokio::test]
async fn grid_is_stable_and_complete() {
    let app = app();
    let (s, a) = get(&app, "/api/grid").await;
    let (_, b) = get(&app, "/api/grid").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(a, b);
    let v = json(&a);
    assert_eq!(v["v"], 1);
    assert_eq!(v["cell_count"], 400);
    assert_eq!(v["cells"].as_array().unwrap().len(), 400);
    let features = v["geojson"]["features"].as_array().unwrap();
    assert_eq!(features.len(), 400);
    assert_eq!(features[0]["geometry"]["type"], "Polygon");
}

#[tokio::test]
async fn unknown_paths_are_404() {
    assert_eq!(get(&app(), "/api/gird").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app(), "/api/risk/2015").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn risk_counts_match_state() {
    let state = state();
    let app = router(state.clone());
    for year in state.years() {
        let (s, b) = get(&app, &format!("/api/risk?year={year}")).await;
        assert_eq!(s, StatusCode::OK);
        let v = json(&b);
        assert_eq!(v["v"], 1);
        assert_eq!(v["count"].as_u64().unwrap() as usize, state.risk_count(year).unwrap());
        let cells = v["cells"].as_array().unwrap();
        assert_eq!(cells.len(), 400);
        let ones = cells.iter().filter(|c| c["risk"] == "1").count();
        assert_eq!(ones as u64, v["count"].as_u64().unwrap());
        assert_eq!(get(&app, &format!("/api/risk?year={year}")).await.1, b);
    }
}

#[tokio::test]
async fn unknown_year_lists_known_years() {
    let (s, b) = get(&app(), "/api/risk?year=1999").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(json(&b)["known_years"], json!([2013, 2014, 2015, 2016, 2017]));
    let (s, _) = get(&app(), "/api/risk").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = get(&app(), "/api/risk?year=abc").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn identity_scenario_changes_nothing() {
    let app = app();
    let (s, v) = post(&app, r#"{"year": 2017, "kind": "pdsi_delta", "parameter": 0}"#).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["v"], 1);
    assert_eq!(v["delta"], 0);
    assert_eq!(v["baseline_risk_cells"], v["treated_risk_cells"]);
    assert!(v["flips"].as_array().unwrap().is_empty());
    let (_, risk) = get(&app, "/api/risk?year=2017").await;
    assert_eq!(v["baseline_risk_cells"], json(&risk)["count"]);
}

#[tokio::test]
async fn drought_relief_lowers_risk() {
    let (s, v) = post(&app(), r#"{"year": 2017, "kind": "pdsi_delta", "parameter": 2}"#).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["treated_risk_cells"].as_u64() <= v["baseline_risk_cells"].as_u64());
    assert_eq!(v["scenario"], json!({"kind": "pdsi_delta", "delta": 2.0}));
    let flips = v["flips"].as_array().unwrap();
    assert_eq!(flips.len() as i64, -v["delta"].as_i64().unwrap());
    assert!(flips.iter().all(|f| f["before"] == 1 && f["after"] == 0));
}

#[tokio::test]
async fn invalid_requests_are_422() {
    let app = app();
    for body in [
        r#"{"year": 2017, "kind": "ndvi_scale", "parameter": -1}"#,
        r#"{"year": 2017, "kind": "pdsi_delta"}"#,
        r#"{"year": 2017, "kind": "rain_dance", "parameter": 1}"#,
        r#"{"year": 2017}"#,
        r#"not json"#,
    ] {
        let (s, v) = post(&app, body).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(v["v"], 1);
        assert!(v["error"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let (s, v) = post(&app, r#"{"year": 1990, "kind": "clear_mortality"}"#).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["known_years"].is_array());
}

#[tokio::test]
async fn requests_are_stateless() {
    let reqs = [
        r#"{"year": 2015, "kind": "pdsi_delta", "parameter": 3}"#,
        r#"{"year": 2015, "kind": "clear_mortality"}"#,
        r#"{"year": 2016, "kind": "population_scale", "parameter": 10}"#,
        r#"{"year": 2014, "kind": "ndvi_scale", "parameter": 1.3}"#,
    ];
    let shared = app();
    let mut in_sequence = Vec::new();
    for r in reqs {
        in_sequence.push(post(&shared, r).await);
    }
    for (r, seq) in reqs.iter().zip(&in_sequence) {
        assert_eq!(&post(&app(), r).await, seq);
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_requests_agree() {
    let app = app();
    let body = r#"{"year": 2016, "kind": "pdsi_delta", "parameter": 1.5}"#;
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { post(&app, body).await })
        })
        .collect();
    let mut results = Vec::new();
    for h in handles {
        results.push(h.await.unwrap());
    }
    assert!(results.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn model_info_echoes_training() {
    let (s, b) = get(&app(), "/api/model/info").await;
    assert_eq!(s, StatusCode::OK);
    let v = json(&b);
    let model = common::read_json(&workspace().join("model.json"));
    assert_eq!(v["v"], 1);
    assert_eq!(v["variant"], "mlp");
    assert_eq!(v["content_hash"], model["content_hash"]);
    assert_eq!(v["training"]["seed"], 7);
    assert_eq!(v["metadata"]["run"]["seed"], 7);
    assert_eq!(v["fire_threshold"], 300.0);
}

#[tokio::test]
async fn serves_over_tcp() {
    let state = state();
    let (tx, rx) = tokio::sync::oneshot::channel();
    let server = tokio::spawn(wildrisk::service::serve(state, "127.0.0.1:0".parse().unwrap(), move |a| {
        let _ = tx.send(a);
    }));
    let addr = rx.await.unwrap();
    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream.write_all(b"GET /healthz HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").await.unwrap();
    let mut buf = String::new();
    stream.read_to_string(&mut buf).await.unwrap();
    assert!(buf.starts_with("HTTP/1.1 200"), "{buf}");
    assert!(buf.ends_with("ok"));
    server.abort();
}

#[test]
fn static_models_are_refused() {
    let ws = workspace();
    common::ok(ws, &["assemble-static", "--region", "a", "--out", "static.csv"]);
    common::ok(ws, &["train", "--table", "static.csv", "--model", "rf", "--seed", "1", "--out", "static_model.json"]);
    let src = Source { region: Some(ws.join("a")), table: Some(ws.join("dyn.csv")), year: None };
    assert!(session_state(&RunConfig::default(), &ws.join("static_model.json"), &src).is_err());
}
