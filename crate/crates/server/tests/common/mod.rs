//! A small pipeline run used as the service's data directory.
#![allow(dead_code)]

use std::fs;
use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use wata_core::{run_pipeline, PipelineConfig, TweetRecord};

pub const COUNTRIES: [(&str, &str); 8] = [
    ("US", "Chicago, IL"),
    ("GB", "Leeds, England"),
    ("CA", "Toronto"),
    ("IN", "Mumbai, India"),
    ("AU", "Brisbane"),
    ("ZA", "Cape Town"),
    ("IE", "Galway"),
    ("NG", "Lagos"),
];

const WORDS: [&str; 12] = [
    "dose", "clinic", "queue", "today", "finally", "arm", "nurse", "second", "first", "booked", "waiting", "news",
];

/// Writes 2,400 tweets, runs the pipeline into `dir/run`, and returns that
/// directory. Each country's tweets carry `<code>jab` a third of the time.
pub fn pipeline_run(dir: &Path) -> std::path::PathBuf {
    let base = chrono::DateTime::parse_from_rfc3339("2021-01-10T00:00:00Z").unwrap().to_utc();
    let mut lines = Vec::new();
    for i in 0..2_400usize {
        let (code, location) = COUNTRIES[i % 8];
        let mut text = format!(
            "vaccine {} {} {}",
            WORDS[(i / 8) % 12],
            WORDS[(i / 96) % 12],
            WORDS[(i * 5 / 8 + 3) % 12]
        );
        if (i / 8) % 3 == 0 {
            text.push_str(&format!(" {}jab", code.to_lowercase()));
        }
        let rec = TweetRecord {
            tweet_id: format!("{i}"),
            text,
            author_id: format!("u{i}"),
            author_location: location.into(),
            author_bio: String::new(),
            author_name: if (i / 8) % 2 == 0 { "Mary Smith" } else { "John Okafor" }.into(),
            timestamp: base + chrono::Duration::minutes(i as i64),
            language: "en".into(),
        };
        lines.push(rec.to_line());
    }
    let input = dir.join("tweets.jsonl");
    fs::write(&input, lines.join("\n") + "\n").unwrap();
    let lexicon = dir.join("names.csv");
    fs::write(&lexicon, "name,gender,proportion\nmary,female,0.99\njohn,male,0.99\n").unwrap();
    let out = dir.join("run");
    run_pipeline(&PipelineConfig {
        inputs: vec![input],
        seed: Some(1),
        gender_lexicon: Some(lexicon),
        out: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    out
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    call_with(app, method, uri, body, None).await
}

pub async fn call_with(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
    token: Option<&str>,
) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(wata_server::TOKEN_HEADER, t);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}
