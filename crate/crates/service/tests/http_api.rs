mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use std::sync::Arc;
use tower::ServiceExt;

use advqa_service::router;

struct Api {
    app: axum::Router,
    _dir: tempfile::TempDir,
    fx: common::Fixture,
}

fn api() -> Api {
    let fx = common::fixture();
    let dir = tempfile::tempdir().unwrap();
    let svc = Arc::new(fx.open(dir.path()));
    Api {
        app: router(svc),
        _dir: dir,
        fx,
    }
}

impl Api {
    async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string()))
                .unwrap(),
            None => req.body(Body::empty()).unwrap(),
        };
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, value)
    }

    async fn create(&self, model: &str, answer: &str) -> String {
        let (status, body) = self
            .call(
                "POST",
                "/api/sessions",
                Some(json!({"author_id": "a1", "model_id": model, "answer": answer})),
            )
            .await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["session_id"].as_str().unwrap().to_string()
    }

    async fn draft(&self, id: &str, text: &str) -> (StatusCode, Value) {
        self.call("POST", &format!("/api/sessions/{id}/draft"), Some(json!({ "text": text })))
            .await
    }
}

fn assert_error(status: StatusCode, body: &Value, want_status: u16, code: &str) {
    assert_eq!(status.as_u16(), want_status, "{body}");
    assert_eq!(body["error_code"], code, "{body}");
    assert!(body["message"].is_string());
}

#[tokio::test]
async fn models_and_answer_picker() {
    let api = api();
    let (status, body) = api.call("GET", "/api/models", None).await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<&str> = body.as_array().unwrap().iter().map(|m| m["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["dan", "ir"]);
    for m in body.as_array().unwrap() {
        assert_eq!(m["num_answers"], 10);
    }

    let (status, all) = api.call("GET", "/api/answers?prefix=", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(all.as_array().unwrap().len(), 10);
    let first = all[0]["canonical_name"].as_str().unwrap().to_string();

    let upper: String = first[..2].to_uppercase();
    let (_, hits) = api.call("GET", &format!("/api/answers?prefix={upper}&model=ir"), None).await;
    let names: Vec<&str> = hits.as_array().unwrap().iter().map(|l| l["canonical_name"].as_str().unwrap()).collect();
    assert!(names.contains(&first.as_str()));
    assert!(names.iter().all(|n| n.starts_with(&first[..2])));

    let (_, none) = api.call("GET", "/api/answers?prefix=zzzzqqq", None).await;
    assert_eq!(none, json!([]));
    let (_, page) = api.call("GET", "/api/answers?limit=3", None).await;
    assert_eq!(page.as_array().unwrap().len(), 3);

    let (status, body) = api.call("GET", "/api/answers?model=nope", None).await;
    assert_error(status, &body, 404, "unknown_model");
    let (status, body) = api.call("GET", "/api/answers?limit=minus", None).await;
    assert_error(status, &body, 400, "invalid_request");
}

#[tokio::test]
async fn create_session_errors() {
    let api = api();
    let answer = api.fx.train.answer_vocab()[0].canonical_name.clone();
    let (status, body) = api
        .call(
            "POST",
            "/api/sessions",
            Some(json!({"author_id": "a", "model_id": "bert", "answer": answer})),
        )
        .await;
    assert_error(status, &body, 404, "unknown_model");

    let (status, body) = api
        .call(
            "POST",
            "/api/sessions",
            Some(json!({"author_id": "a", "model_id": "ir", "answer": "Nobody At All"})),
        )
        .await;
    assert_error(status, &body, 400, "unknown_answer");

    let (status, body) = api.call("POST", "/api/sessions", Some(json!({"author_id": "a"}))).await;
    assert_error(status, &body, 400, "invalid_request");

    let a = api.create("ir", &answer).await;
    let b = api.create("ir", &answer).await;
    assert_ne!(a, b);
    let (status, body) = api.call("GET", &format!("/api/sessions/{a}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["state"], "open");
    assert_eq!(body["events"], json!([]));
    assert_eq!(body["answer"]["canonical_name"], answer.as_str());

    let (status, body) = api.call("GET", "/api/nothing", None).await;
    assert_error(status, &body, 404, "not_found");
}

#[tokio::test]
async fn draft_feedback_shape() {
    let api = api();
    for model in ["ir", "dan"] {
        let q = api.fx.test_questions()[0].clone();
        let id = api.create(model, &q.answer.canonical_name).await;
        let (status, body) = api.draft(&id, &q.raw_text).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        assert_eq!(body["seq"], 1);
        let guesses = body["guesses"].as_array().unwrap();
        assert_eq!(guesses.len(), 5);
        let scores: Vec<f64> = guesses.iter().map(|g| g["score"].as_f64().unwrap()).collect();
        assert!(scores.windows(2).all(|w| w[0] >= w[1]));
        let top_is_gold = guesses[0]["answer"] == q.answer.canonical_name.as_str();
        assert_eq!(body["top1_correct"], top_is_gold);

        let tokens: Vec<&str> = body["evidence"]["tokens"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
        assert_eq!(tokens, q.tokens.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(body["evidence"]["weights"].as_array().unwrap().len(), tokens.len());
        assert_eq!(body["evidence"]["class_index"], guesses[0]["class_index"]);

        let first = &body["buzz"]["first"];
        let stable = &body["buzz"]["stable"];
        assert!(first.is_null() || (0.0..=1.0).contains(&first.as_f64().unwrap()));
        assert!(stable.is_null() || stable.as_f64() >= first.as_f64());
        assert_eq!(body["buzz"]["granularity"], "sentence");

        let (status, body) = api
            .call(
                "POST",
                &format!("/api/sessions/{id}/draft"),
                Some(json!({"text": q.raw_text, "granularity": "word", "target": "gold"})),
            )
            .await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["seq"], 2);
        assert_eq!(body["buzz"]["granularity"], "word");
        assert_eq!(body["evidence"]["class_index"], q.answer.class_index);
    }
}

#[tokio::test]
async fn draft_errors() {
    let api = api();
    let answer = api.fx.train.answer_vocab()[1].canonical_name.clone();
    let id = api.create("dan", &answer).await;
    let (status, body) = api.draft(&id, "  ?! ... ").await;
    assert_error(status, &body, 400, "empty_draft");
    let (status, body) = api.draft("missing", "some words here").await;
    assert_error(status, &body, 404, "unknown_session");
    let (status, body) = api
        .call("POST", &format!("/api/sessions/{id}/draft"), Some(json!({"txt": "x"})))
        .await;
    assert_error(status, &body, 400, "invalid_request");
    let (status, body) = api
        .call(
            "POST",
            &format!("/api/sessions/{id}/draft"),
            Some(json!({"text": "x", "granularity": "paragraph"})),
        )
        .await;
    assert_error(status, &body, 400, "invalid_request");

    // Rejected calls leave no events behind.
    let (_, traj) = api.call("GET", &format!("/api/sessions/{id}/trajectory"), None).await;
    assert_eq!(traj["points"], json!([]));
}

#[tokio::test]
async fn submission_state_machine() {
    let api = api();
    let train_q = api.fx.train_questions()[3].clone();
    let test_q = api
        .fx
        .test_questions()
        .into_iter()
        .find(|q| q.answer == train_q.answer)
        .unwrap();
    let id = api.create("ir", &train_q.answer.canonical_name).await;

    let (status, body) = api.call("POST", &format!("/api/sessions/{id}/submit"), None).await;
    assert_error(status, &body, 409, "no_drafts");

    api.draft(&id, &train_q.raw_text).await;
    let (status, body) = api.call("POST", &format!("/api/sessions/{id}/submit"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"verdict": "reject", "reason": "duplicate_of_training", "state": "open"}));

    api.draft(&id, "Short one.").await;
    let (_, body) = api.call("POST", &format!("/api/sessions/{id}/submit"), None).await;
    assert_eq!(body["reason"], "too_short");

    let attack = api.fx.corpus.paraphrase(&test_q);
    api.draft(&id, &attack.raw_text).await;
    let (status, body) = api.call("POST", &format!("/api/sessions/{id}/submit"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"verdict": "accept", "state": "submitted"}));

    let (status, body) = api.call("POST", &format!("/api/sessions/{id}/submit"), None).await;
    assert_error(status, &body, 409, "session_closed");
    let (status, body) = api.draft(&id, &attack.raw_text).await;
    assert_error(status, &body, 409, "session_closed");
    let (status, body) = api.call("POST", &format!("/api/sessions/{id}/abandon"), None).await;
    assert_error(status, &body, 409, "session_closed");

    let (_, session) = api.call("GET", &format!("/api/sessions/{id}"), None).await;
    assert_eq!(session["state"], "submitted");
    assert_eq!(session["events"].as_array().unwrap().len(), 3);
    assert_eq!(session["submission_id"], format!("adv-{id}"));

    // The same text under a second session duplicates the accepted submission.
    let other = api.create("dan", &train_q.answer.canonical_name).await;
    api.draft(&other, &attack.raw_text).await;
    let (_, body) = api.call("POST", &format!("/api/sessions/{other}/submit"), None).await;
    assert_eq!(body["reason"], "duplicate_of_submission");

    let (status, body) = api.call("POST", &format!("/api/sessions/{other}/abandon"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["state"], "abandoned");
    let (status, body) = api.draft(&other, &attack.raw_text).await;
    assert_error(status, &body, 409, "session_closed");

    let (_, listed) = api.call("GET", "/api/sessions", None).await;
    assert_eq!(listed.as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn trajectory_follows_drafts() {
    let api = api();
    let q = api.fx.test_questions()[5].clone();
    let id = api.create("ir", &q.answer.canonical_name).await;
    let words: Vec<&str> = q.raw_text.split(' ').collect();
    let drafts = [words[..3].join(" "), words[..words.len() / 2].join(" "), q.raw_text.clone()];
    let mut firsts = Vec::new();
    for d in &drafts {
        let (status, body) = api.draft(&id, d).await;
        assert_eq!(status, StatusCode::OK);
        firsts.push(body["buzz"]["first"].clone());
    }
    let (status, body) = api.call("GET", &format!("/api/sessions/{id}/trajectory"), None).await;
    assert_eq!(status, StatusCode::OK);
    let points = body["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    for (i, p) in points.iter().enumerate() {
        assert_eq!(p["seq"], i as u64 + 1);
        assert_eq!(p["len"], advqa_core::corpus::tokenize(&drafts[i]).len());
        assert_eq!(p["first"], firsts[i]);
    }
    let (status, body) = api.call("GET", "/api/sessions/none/trajectory", None).await;
    assert_error(status, &body, 404, "unknown_session");
}
