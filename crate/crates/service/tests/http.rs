mod common;

use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use common::*;
use http_body_util::BodyExt;
use rpm_sync::{wire, NodeStore};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    let f = fixture();
    rpm_service::http::router(Arc::new(Mutex::new(f.svc)))
}

async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Body, content_type: &str) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri).header(header::CONTENT_TYPE, content_type);
    if let Some(t) = token {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn json_call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Value) -> (StatusCode, Value) {
    let body = if body.is_null() { Body::empty() } else { Body::from(body.to_string()) };
    call(app, method, uri, token, body, "application/json").await
}

async fn token(app: &Router, user: &str) -> String {
    let (s, v) = json_call(app, "POST", "/login", None, json!({"user_id": user, "password": format!("pw-{user}")})).await;
    assert_eq!(s, StatusCode::OK);
    v["token"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn login_failure_code() {
    let app = app();
    let (s, v) = json_call(&app, "POST", "/login", None, json!({"user_id": "p1", "password": "x"})).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    assert_eq!(v["code"], "AuthFailure");
}

#[tokio::test]
async fn submit_and_read_back() {
    let app = app();
    let p1 = token(&app, "p1").await;
    let r = dt_response("p1", 5, &["sleep"], t0());
    let (s, v) = json_call(&app, "POST", "/responses", Some(&p1), serde_json::to_value(&r).unwrap()).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["id"], r.id.to_string());

    let (s, v) = json_call(&app, "POST", "/responses", Some(&p1), serde_json::to_value(&r).unwrap()).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::CONFLICT, Some("DuplicateSubmission")));

    let mut bad = dt_response("p1", 12, &[], t0());
    bad.answers.insert("bogus".into(), rpm_core::Answer::Boolean(true));
    let (s, v) = json_call(&app, "POST", "/responses", Some(&p1), serde_json::to_value(&bad).unwrap()).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("ValidationFailure")));
    assert_eq!(v["violations"].as_array().unwrap().len(), 2);

    let dr = token(&app, "dr").await;
    let (s, v) = json_call(&app, "GET", "/subjects/p1/screenings", Some(&dr), Value::Null).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v[0]["summary"]["thermometer_score"], 5);
    assert_eq!(v[0]["summary"]["flagged"], true);

    let (s, v) = json_call(&app, "GET", "/subjects/p1/screenings?from=2019-01-02T00:00:00Z", Some(&dr), Value::Null).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 0);

    let (s, v) = json_call(&app, "GET", "/subjects/p1/due?now=2019-02-20T09:00:00Z", Some(&dr), Value::Null).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["state"], "overdue");
    assert_eq!(v["due_at"], "2019-02-12T09:00:00Z");

    let p2 = token(&app, "p2").await;
    let (s, v) = json_call(&app, "GET", "/subjects/p1/screenings", Some(&p2), Value::Null).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::FORBIDDEN, Some("AuthFailure")));
    let (s, _) = json_call(&app, "GET", "/subjects/p1/screenings", None, Value::Null).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn bundles_consent_observations_sus_audit() {
    let app = app();
    let p1 = token(&app, "p1").await;
    let (s, v) = json_call(&app, "POST", "/consent", Some(&p1), json!({"subject_id": "p1", "data_type": "heart_rate", "decision": "granted"})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["grants"]["heart_rate"], "granted");

    let mut device = NodeStore::new("p1");
    let o = rpm_core::Observation {
        id: uuid::Uuid::new_v4(),
        subject_id: "p1".into(),
        data_type: "heart_rate".into(),
        value: 61.5,
        unit: "bpm".into(),
        observed_at: t0(),
        source: "band".into(),
    };
    let b = rpm_service::device::package_observation(&mut device, "clinic", &o, 3600, t0()).unwrap();
    let frames = wire::encode_all(std::slice::from_ref(&b)).unwrap();
    let (s, v) = call(&app, "POST", "/bundles", Some(&p1), Body::from(frames), "application/octet-stream").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["results"][0]["status"], "delivered");
    let ack_hex = v["results"][0]["ack"].as_str().unwrap();
    let ack = wire::decode_all(&hex::decode(ack_hex).unwrap()).unwrap();
    assert_eq!(ack[0].acked_id(), Some(b.id));

    let (s, v) = call(&app, "POST", "/bundles", Some(&p1), Body::from(vec![1, 2, 3]), "application/octet-stream").await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("MalformedBundle")));

    let dr = token(&app, "dr").await;
    let (s, v) = json_call(&app, "GET", "/subjects/p1/observations?data_type=heart_rate", Some(&dr), Value::Null).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v[0]["value"], 61.5);

    let (s, v) = json_call(&app, "POST", "/sus", Some(&dr), json!({"items": [3,3,3,3,3,3,3,3,3,3], "tool_label": "digital"})).await;
    assert_eq!((s, v["score"].as_f64()), (StatusCode::CREATED, Some(50.0)));
    let (s, v) = json_call(&app, "POST", "/sus", Some(&dr), json!({"items": [3,3,3], "tool_label": "digital"})).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("ValidationFailure")));

    let (s, v) = json_call(&app, "GET", "/audit", Some(&dr), Value::Null).await;
    assert_eq!(s, StatusCode::OK);
    let entries = v.as_array().unwrap();
    assert!(entries.iter().any(|e| e["action"] == "consent_change"));
    let (s, _) = json_call(&app, "GET", "/audit", Some(&p1), Value::Null).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
}
