use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use screening_core::{ReferenceTable, Store};
use screening_service::{router, AppState, ServiceConfig};

const SAMPLE_CNP: &str = "1900410354721";

fn app_with(config: &ServiceConfig) -> Router {
    let state = AppState::new(
        Arc::new(Store::in_memory()),
        Arc::new(ReferenceTable::seed()),
    );
    router(state, config).unwrap()
}

fn app() -> Router {
    app_with(&ServiceConfig::default())
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes)
        .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into_owned()));
    (status, value)
}

fn sample_session() -> Value {
    json!({
        "date": "2007-06-01",
        "age": 17,
        "sex": "M",
        "height_m": 1.70,
        "weight_kg": 73,
        "chest_mm": 12.9,
        "midaxillary_mm": 15.2,
        "triceps_mm": 10.8,
        "subscapular_mm": 17.3,
        "abdomen_mm": 18.7,
        "suprailiac_mm": 15.6,
        "thigh_mm": 10.5
    })
}

async fn register_sample(app: &Router) {
    let (status, _) = call(
        app,
        Method::POST,
        "/subjects",
        Some(json!({"cnp": SAMPLE_CNP, "environment": "urban"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
}

fn assert_api_error(body: &Value, code: &str) {
    assert_eq!(body["code"], code, "{body}");
    assert!(
        body["message"].as_str().is_some_and(|m| !m.is_empty()),
        "{body}"
    );
}

#[tokio::test]
async fn healthz_says_ok() {
    let (status, body) = call(&app(), Method::GET, "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "ok");
}

#[tokio::test]
async fn sample_session_returns_display_strings() {
    let app = app();
    register_sample(&app).await;
    let uri = format!("/subjects/{SAMPLE_CNP}/sessions");
    let (status, body) = call(&app, Method::POST, &uri, Some(sample_session())).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["bmi_display"], "25.26");
    assert_eq!(body["bd_display"], "1.069");
    assert_eq!(body["pat_display"], "10");
    assert_eq!(body["pat_percent"], 10);
    assert_eq!(body["age"], 17);
    assert_eq!(body["pat_supported"], true);
    assert_eq!(body["classification"]["label"], "Pre-obese");
    assert_eq!(body["classification"]["additional"], "pre_obese_lower");
    assert_eq!(body["classification"]["overweight"], true);
    assert_eq!(body["weight_band"]["level"], "high");
    assert!((body["bmi"].as_f64().unwrap() - 25.259_515_570_934_256).abs() < 1e-12);
    assert!(body["warnings"][0]
        .as_str()
        .unwrap()
        .contains("control digit"));
}

#[tokio::test]
async fn subject_creation_is_idempotent() {
    let app = app();
    let body = json!({"cnp": SAMPLE_CNP, "name": "Ion", "environment": "urban"});
    let (s1, b1) = call(&app, Method::POST, "/subjects", Some(body.clone())).await;
    let (s2, b2) = call(&app, Method::POST, "/subjects", Some(body)).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(b1, b2);
    assert_eq!(b1["sex"], "M");
    assert_eq!(b1["birthdate"], "1990-04-10");
    assert_eq!(b1["checksum_ok"], false);
}

#[tokio::test]
async fn contradicting_cnp_is_a_conflict() {
    let app = app();
    let (status, body) = call(
        &app,
        Method::POST,
        "/subjects",
        Some(json!({"cnp": SAMPLE_CNP, "sex": "F"})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_api_error(&body, "cnp_conflict");
    assert_eq!(body["field"], "sex");

    register_sample(&app).await;
    let mut session = sample_session();
    session["sex"] = json!("F");
    let uri = format!("/subjects/{SAMPLE_CNP}/sessions");
    let (status, _) = call(&app, Method::POST, &uri, Some(session)).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn validation_errors_name_the_field() {
    let app = app();
    register_sample(&app).await;
    let uri = format!("/subjects/{SAMPLE_CNP}/sessions");

    let mut session = sample_session();
    session["height_m"] = json!(0);
    let (status, body) = call(&app, Method::POST, &uri, Some(session)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_api_error(&body, "validation");
    assert_eq!(body["field"], "height_m");

    let mut session = sample_session();
    session.as_object_mut().unwrap().remove("thigh_mm");
    let (status, body) = call(&app, Method::POST, &uri, Some(session)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["field"], "thigh_mm");

    let mut session = sample_session();
    session["date"] = json!("01.06.2007");
    let (_, body) = call(&app, Method::POST, &uri, Some(session)).await;
    assert_eq!(body["field"], "date");

    let (status, body) = call(
        &app,
        Method::POST,
        "/subjects",
        Some(json!({"cnp": "12345"})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["field"], "cnp");

    let request = Request::post("/subjects")
        .body(Body::from("{not json"))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    assert_eq!(response.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_subject_is_404() {
    let app = app();
    for uri in [
        "/subjects/unknown/history",
        "/subjects/2900410354721/history",
        "/subjects/2900410354721/latest",
    ] {
        let (status, body) = call(&app, Method::GET, uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_api_error(&body, "unknown_subject");
    }
    let (status, _) = call(
        &app,
        Method::POST,
        "/subjects/2900410354721/sessions",
        Some(sample_session()),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn reference_lookup() {
    let app = app();
    let (status, body) = call(&app, Method::GET, "/reference?age=17&sex=M&env=urban", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["mean_kg"], 63.473);
    assert_eq!(body["sd_kg"], 9.035);
    let expected = [45.403, 54.438, 72.508, 81.543];
    for (got, want) in body["thresholds"].as_array().unwrap().iter().zip(expected) {
        assert!((got.as_f64().unwrap() - want).abs() < 1e-9);
    }

    let (status, body) = call(&app, Method::GET, "/reference?age=9&sex=F&env=rural", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_api_error(&body, "unknown_reference");

    let (status, body) = call(&app, Method::GET, "/reference?age=9&sex=X&env=rural", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["field"], "sex");

    let (status, body) = call(&app, Method::GET, "/reference?sex=M&env=rural", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["field"], "age");
}

#[tokio::test]
async fn history_latest_and_flags() {
    let app = app();
    register_sample(&app).await;
    let hist = format!("/subjects/{SAMPLE_CNP}/history");
    let (_, body) = call(&app, Method::GET, &hist, None).await;
    assert_eq!(body, json!([]));
    let (status, body) = call(
        &app,
        Method::GET,
        &format!("/subjects/{SAMPLE_CNP}/latest"),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_api_error(&body, "no_sessions");

    let uri = format!("/subjects/{SAMPLE_CNP}/sessions");
    call(&app, Method::POST, &uri, Some(sample_session())).await;
    let mut slimmer = sample_session();
    slimmer["date"] = json!("2007-09-01");
    slimmer["weight_kg"] = json!(60);
    call(&app, Method::POST, &uri, Some(slimmer)).await;

    let (_, body) = call(&app, Method::GET, &hist, None).await;
    let rows = body.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["weight_kg"], 73.0);
    assert!(rows[0].get("warnings").is_none());

    let (_, body) = call(&app, Method::GET, &format!("{hist}?limit=1"), None).await;
    assert_eq!(body.as_array().unwrap().len(), 1);
    assert_eq!(body[0]["weight_kg"], 60.0);

    let (_, body) = call(
        &app,
        Method::GET,
        &format!("/subjects/{SAMPLE_CNP}/latest"),
        None,
    )
    .await;
    assert_eq!(body["date"], "2007-09-01");

    // Latest BMI 20.76 is normal, so the subject is no longer flagged.
    let (_, body) = call(&app, Method::GET, "/flags", None).await;
    assert_eq!(body, json!([]));

    let (status, body) = call(&app, Method::GET, "/flags?limit=x", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["field"], "limit");
}

#[tokio::test]
async fn flags_list_sample_subject() {
    let app = app();
    register_sample(&app).await;
    call(
        &app,
        Method::POST,
        &format!("/subjects/{SAMPLE_CNP}/sessions"),
        Some(sample_session()),
    )
    .await;
    let (status, body) = call(&app, Method::GET, "/flags", None).await;
    assert_eq!(status, StatusCode::OK);
    let rows = body.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["subject"]["cnp"], SAMPLE_CNP);
    assert_eq!(rows[0]["latest"]["bmi_display"], "25.26");
    assert_eq!(rows[0]["latest"]["classification"]["label"], "Pre-obese");
}

#[tokio::test]
async fn adult_session_has_no_composition() {
    let app = app();
    register_sample(&app).await;
    let mut session = sample_session();
    session["date"] = json!("2010-06-01");
    session.as_object_mut().unwrap().remove("age");
    let (status, body) = call(
        &app,
        Method::POST,
        &format!("/subjects/{SAMPLE_CNP}/sessions"),
        Some(session),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["age"], 20);
    assert_eq!(body["pat_supported"], false);
    assert_eq!(body["bd_display"], Value::Null);
    assert_eq!(body["pat_display"], Value::Null);
    assert_eq!(body["bmi_display"], "25.26");
    assert_eq!(body["weight_band"], Value::Null);
}

#[tokio::test]
async fn unknown_route_and_method_carry_error_bodies() {
    let app = app();
    let (status, body) = call(&app, Method::GET, "/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_api_error(&body, "not_found");
    let (status, body) = call(&app, Method::DELETE, "/flags", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    assert_api_error(&body, "method_not_allowed");
}

#[tokio::test]
async fn cors_allows_ui_origin() {
    let app = app_with(&ServiceConfig {
        ui_origin: Some("http://localhost:5173".into()),
        ui_dir: None,
    });
    let request = Request::get("/healthz")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert_eq!(
        response.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN],
        "http://localhost:5173"
    );
}

#[tokio::test]
async fn serves_ui_assets_when_configured() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>ui</h1>").unwrap();
    let app = app_with(&ServiceConfig {
        ui_origin: None,
        ui_dir: Some(dir.path().to_path_buf()),
    });
    let (status, body) = call(&app, Method::GET, "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "<h1>ui</h1>");
    let (status, body) = call(&app, Method::GET, "/missing.js", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_api_error(&body, "not_found");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_posts_lose_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("screening.csv");
    let store = Arc::new(Store::open(&path).unwrap());
    let state = AppState::new(store, Arc::new(ReferenceTable::seed()));
    let app = router(state, &ServiceConfig::default()).unwrap();

    let cnps: Vec<String> = (1..=10).map(|i| format!("5{i:02}0101354721")).collect();
    for cnp in &cnps {
        let (status, _) = call(&app, Method::POST, "/subjects", Some(json!({"cnp": cnp}))).await;
        assert_eq!(status, StatusCode::OK);
    }

    let mut tasks = Vec::new();
    for k in 0..10 {
        for cnp in &cnps {
            let app = app.clone();
            let uri = format!("/subjects/{cnp}/sessions");
            let mut session = sample_session();
            session.as_object_mut().unwrap().remove("age");
            session.as_object_mut().unwrap().remove("sex");
            session["date"] = json!(format!("2016-03-{:02}", k + 1));
            session["weight_kg"] = json!(40 + k);
            tasks.push(tokio::spawn(async move {
                call(&app, Method::POST, &uri, Some(session)).await.0
            }));
        }
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }

    for cnp in &cnps {
        let (_, body) = call(&app, Method::GET, &format!("/subjects/{cnp}/history"), None).await;
        let mut weights: Vec<i64> = body
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["weight_kg"].as_f64().unwrap() as i64)
            .collect();
        weights.sort_unstable();
        assert_eq!(weights, (40..50).collect::<Vec<_>>(), "{cnp}");
    }
    let reopened = Store::open(&path).unwrap();
    assert_eq!(reopened.session_count(), 100);
}
