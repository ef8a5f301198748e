use std::time::Duration;

use argwf_service::{router, AppState, Store, REVISION_HEADER};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const PROBLEM: &str = r#"{
  "alpha": 0.5, "beta": 0.5, "depot": [0, 0],
  "operators": [{"id": "O1"}, {"id": "O2"}],
  "jobs": [{"id": "J1", "x": 3, "y": 4}, {"id": "J2", "x": 5, "y": 12}, {"id": "J3", "x": 5, "y": 12}],
  "processing": [[120, 60, 30], [120, 60, 60]]
}"#;

const SCHEDULE: &str = r#"{"routes": {"O1": ["J1", "J3"], "O2": ["J2"]}}"#;

struct Reply {
    status: StatusCode,
    revision: Option<u64>,
    content_type: String,
    text: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: &str) -> Reply {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let revision = res
        .headers()
        .get(REVISION_HEADER)
        .map(|v| v.to_str().unwrap().parse().unwrap());
    let content_type = res
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        revision,
        content_type,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

fn app() -> Router {
    router(AppState::new(Store::new()))
}

/// Creates the two-operator problem and stores its schedule; returns the
/// id and the current revision.
async fn seeded(app: &Router) -> (String, u64) {
    let r = call(app, Method::POST, "/problems", PROBLEM).await;
    assert_eq!(r.status, StatusCode::CREATED);
    let id = r.json()["id"].as_str().unwrap().to_string();
    let r = call(app, Method::PUT, &format!("/problems/{id}/schedule"), SCHEDULE).await;
    assert_eq!(r.status, StatusCode::OK);
    (id, r.revision.unwrap())
}

fn codes(v: &Value) -> Vec<String> {
    v["explanations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["code"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn create_and_fetch() {
    let app = app();
    let r = call(&app, Method::POST, "/problems", PROBLEM).await;
    assert_eq!(r.status, StatusCode::CREATED);
    let body = r.json();
    assert_eq!(body["revision"], 1);
    let id = body["id"].as_str().unwrap();
    let r = call(&app, Method::GET, &format!("/problems/{id}"), "").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.revision, Some(1));
    let body = r.json();
    assert_eq!(body["problem"]["jobs"][1]["id"], "J2");
    assert_eq!(body["schedule"]["routes"]["O1"], json!([]));
}

#[tokio::test]
async fn validate_flags_the_inefficient_schedule() {
    let app = app();
    let (id, rev) = seeded(&app).await;
    let r = call(&app, Method::POST, &format!("/problems/{id}/validate"), "").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.revision, Some(rev));
    let body = r.json();
    assert!(codes(&body).contains(&"NOT_EXTENDED_EFFICIENT".to_string()));
    assert_eq!(body["suppressed"], 0);
    let relocate = body["explanations"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["suggestion"]["kind"] == "relocate-inter")
        .unwrap();
    assert_eq!(
        relocate["message"],
        "Moving job J3 from operator O1 to operator O2 (position 1) reduces the maximum cost by 15.12."
    );
    assert_eq!(relocate["witness"]["relation"], "non-attack");
    assert_eq!(relocate["witness"]["target"], "a(O2,J3)");
}

#[tokio::test]
async fn applying_the_relocation_gives_73() {
    let app = app();
    let (id, rev) = seeded(&app).await;
    let body = call(&app, Method::POST, &format!("/problems/{id}/validate"), "").await.json();
    let suggestion = body["explanations"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["suggestion"]["kind"] == "relocate-inter")
        .unwrap()["suggestion"]
        .clone();
    let req = json!({"revision": rev, "move": suggestion}).to_string();
    let r = call(&app, Method::POST, &format!("/problems/{id}/moves"), &req).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.revision, Some(rev + 1));
    let body = r.json();
    assert!((body["cost"]["makespan"].as_f64().unwrap() - 73.0).abs() < 1e-6);
    assert_eq!(body["schedule"]["routes"]["O2"], json!(["J3", "J2"]));
    let r = call(&app, Method::GET, &format!("/problems/{id}/cost"), "").await;
    assert!((r.json()["makespan"].as_f64().unwrap() - 73.0).abs() < 1e-6);
    // the swap that reaches 65 is still available from here
    let codes = codes(&call(&app, Method::POST, &format!("/problems/{id}/validate"), "").await.json());
    assert!(codes.iter().all(|c| c != "NOT_FEASIBLE_UNASSIGNED" && c != "NOT_FEASIBLE_MULTI"));
}

#[tokio::test]
async fn stale_revision_is_rejected() {
    let app = app();
    let (id, rev) = seeded(&app).await;
    let mv = json!({"kind": "swap-intra", "operator": "O1", "job": "J1", "other_job": "J3"});
    let req = json!({"revision": rev - 1, "move": mv}).to_string();
    let r = call(&app, Method::POST, &format!("/problems/{id}/moves"), &req).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["revision"], rev);
    let r = call(&app, Method::PUT, &format!("/problems/{id}/schedule?revision={}", rev - 1), SCHEDULE).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    let r = call(&app, Method::GET, &format!("/problems/{id}"), "").await;
    assert_eq!(r.revision, Some(rev));
}

#[tokio::test]
async fn moves_against_a_changed_schedule_conflict() {
    let app = app();
    let (id, rev) = seeded(&app).await;
    let mv = json!({"kind": "relocate-inter", "job": "J2", "from": "O1", "to": "O2", "position": 1});
    let req = json!({"revision": rev, "move": mv}).to_string();
    let r = call(&app, Method::POST, &format!("/problems/{id}/moves"), &req).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["error"], "stale-move");
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let app = app();
    for (m, uri) in [
        (Method::GET, "/problems/p9"),
        (Method::POST, "/problems/p9/validate"),
        (Method::POST, "/problems/p9/optimize"),
        (Method::GET, "/problems/p9/cost"),
        (Method::GET, "/problems/p9/af/feasibility"),
        (Method::PUT, "/problems/p9/schedule"),
    ] {
        let r = call(&app, m, uri, SCHEDULE).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(r.json()["error"], "not-found");
    }
}

#[tokio::test]
async fn schema_errors_are_422_with_paths() {
    let app = app();
    let bad = PROBLEM.replace("[[120, 60, 30], [120, 60, 60]]", "[[120, 60], [120, 60]]");
    let r = call(&app, Method::POST, "/problems", &bad).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let body = r.json();
    assert_eq!(body["error"], "schema");
    assert!(body["diagnostics"][0]["path"].as_str().unwrap().starts_with("$.processing"));

    let (id, _) = seeded(&app).await;
    let r = call(&app, Method::PUT, &format!("/problems/{id}/schedule"), r#"{"routes": {"O7": []}}"#).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["diagnostics"][0]["path"], "$.routes.O7");
}

#[tokio::test]
async fn optimize_does_not_mutate() {
    let app = app();
    let (id, rev) = seeded(&app).await;
    let before = call(&app, Method::GET, &format!("/problems/{id}"), "").await.text;
    for mode in ["exact", "local"] {
        let r = call(&app, Method::POST, &format!("/problems/{id}/optimize?mode={mode}"), "").await;
        assert_eq!(r.status, StatusCode::OK, "{}", r.text);
        let body = r.json();
        assert!((body["cost"]["makespan"].as_f64().unwrap() - 65.0).abs() < 1e-6, "{mode}");
        assert_eq!(body["revision"], rev);
    }
    let body = call(&app, Method::POST, &format!("/problems/{id}/optimize?mode=local"), "").await.json();
    assert_eq!(body["trace"].as_array().unwrap().len(), 1);
    assert_eq!(call(&app, Method::GET, &format!("/problems/{id}"), "").await.text, before);
}

#[tokio::test]
async fn optimize_timeout_is_422_with_trace() {
    let app = router(AppState::new(Store::new()).with_deadline(Duration::ZERO));
    let (id, _) = seeded(&app).await;
    for mode in ["local", "exact"] {
        let r = call(&app, Method::POST, &format!("/problems/{id}/optimize?mode={mode}"), "").await;
        assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
        let body = r.json();
        assert_eq!(body["error"], "timeout");
        assert!(body["trace"].is_array());
    }
}

#[tokio::test]
async fn infeasible_optimize_names_blockers() {
    let app = app();
    let problem = PROBLEM
        .replace(r#"{"id": "J1", "x": 3, "y": 4}"#, r#"{"id": "J1", "x": 3, "y": 4, "skills": ["Q"]}"#)
        .replace(r#""depot": [0, 0],"#, r#""depot": [0, 0], "skills": ["Q"],"#);
    let r = call(&app, Method::POST, "/problems", &problem).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
    let id = r.json()["id"].as_str().unwrap().to_string();
    let r = call(&app, Method::POST, &format!("/problems/{id}/optimize"), "").await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let body = r.json();
    assert_eq!(body["error"], "infeasible");
    assert_eq!(body["blockers"], json!([{"job": "J1", "skill": "Q"}]));
}

#[tokio::test]
async fn frameworks_export_as_json_and_dot() {
    let app = app();
    let (id, rev) = seeded(&app).await;
    let r = call(&app, Method::GET, &format!("/problems/{id}/af/efficiency"), "").await;
    assert_eq!(r.status, StatusCode::OK);
    let body = r.json();
    assert_eq!(body["kind"], "efficiency");
    assert_eq!(body["arguments"].as_array().unwrap().len(), 6);
    assert_eq!(body["extension"], json!(["a(O1,J1)", "a(O1,J3)", "a(O2,J2)"]));
    let r = call(&app, Method::GET, &format!("/problems/{id}/af/skills?format=dot"), "").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.revision, Some(rev));
    assert_eq!(r.content_type, "text/vnd.graphviz");
    assert!(r.text.starts_with("digraph"));
    let r = call(&app, Method::GET, &format!("/problems/{id}/af/nonsense"), "").await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn replayed_requests_give_identical_bodies() {
    async fn session() -> Vec<String> {
        let app = app();
        let (id, rev) = seeded(&app).await;
        let mut out = Vec::new();
        for uri in ["validate", "optimize?mode=local"] {
            out.push(call(&app, Method::POST, &format!("/problems/{id}/{uri}"), "").await.text);
        }
        let mv = json!({"kind": "swap-intra", "operator": "O1", "job": "J1", "other_job": "J3"});
        let req = json!({"revision": rev, "move": mv}).to_string();
        out.push(call(&app, Method::POST, &format!("/problems/{id}/moves"), &req).await.text);
        out.push(call(&app, Method::GET, &format!("/problems/{id}/af/individual"), "").await.text);
        out
    }
    assert_eq!(session().await, session().await);
}

#[tokio::test]
async fn spec_is_served() {
    let r = call(&app(), Method::GET, "/spec", "").await;
    assert_eq!(r.status, StatusCode::OK);
    let body = r.json();
    assert_eq!(body["openapi"], "3.0.3");
    assert!(body["paths"]["/problems/{id}/moves"]["post"].is_object());
}

#[tokio::test]
async fn cors_headers_are_present() {
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/problems")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let res = app().oneshot(req).await.unwrap();
    assert!(res.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test]
async fn snapshots_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(Store::with_snapshots(dir.path()).unwrap()));
    let (id, rev) = seeded(&app).await;
    let app = router(AppState::new(Store::with_snapshots(dir.path()).unwrap()));
    let r = call(&app, Method::GET, &format!("/problems/{id}"), "").await;
    assert_eq!(r.revision, Some(rev));
    assert_eq!(r.json()["schedule"]["routes"]["O1"], json!(["J1", "J3"]));
    let r = call(&app, Method::POST, "/problems", PROBLEM).await;
    assert_ne!(r.json()["id"], id);
}
