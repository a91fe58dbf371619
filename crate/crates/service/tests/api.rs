mod common;

use axum::http::{Method, StatusCode};
use common::{body_bytes, call, call_json, send, Deployment};
use glyphforge_core::{GlyphCode, Sign};
use glyphforge_service::events::read_log;
use serde_json::{json, Value};

fn code(text: &str) -> GlyphCode {
    text.parse().unwrap()
}

fn sample_sign() -> Sign {
    let s = Sign::new(400, 400).unwrap().with_label(Some("sample".into()));
    let (s, _) = s.place(code("01-01-002-01-01-01"), 150, 200).unwrap();
    let (s, _) = s.place(code("02-01-001-01-01-02"), 250, 200).unwrap();
    s
}

#[tokio::test]
async fn health_reports_glyph_count() {
    let d = Deployment::df1();
    let (_, app) = d.start();
    let (status, body) = call_json(&app, Method::GET, "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"status": "ok", "glyphs": 24}));
}

#[tokio::test]
async fn search_examples() {
    let d = Deployment::df1();
    let (_, app) = d.start();

    let (status, body) = call_json(&app, Method::GET, "/search?area=hand&fingers=2", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["results"].as_array().unwrap().len(), 4);

    let (_, body) = call_json(&app, Method::GET, "/search?area=hand", None).await;
    assert_eq!(body["results"].as_array().unwrap().len(), 12);
    assert_eq!(
        body["available"],
        json!({"fingers": ["1", "2", "3"], "side": ["palm", "back"]})
    );

    let (_, body) = call_json(&app, Method::GET, "/search?area=hand&fingers=2&side=back", None).await;
    assert_eq!(body["results"], json!(["01-01-002-01-02-01", "01-02-002-01-02-01"]));

    for (uri, error) in [
        ("/search?area=hand&fingers=9", "UnknownOption"),
        ("/search?area=hand&tail=1", "UnknownBox"),
        ("/search?area=tail", "UnknownArea"),
        ("/search?fingers=1", "UnknownArea"),
        ("/search?area=hand&fingers=1&fingers=2", "DuplicateBox"),
    ] {
        let (status, body) = call_json(&app, Method::GET, uri, None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(body["error"], error, "{uri}");
        assert!(body["detail"].as_str().is_some_and(|d| !d.is_empty()));
    }
}

#[tokio::test]
async fn glyph_details_and_images() {
    let d = Deployment::df1();
    let (_, app) = d.start();

    let (status, body) = call_json(&app, Method::GET, "/glyphs/01-02-003-01-02-01", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["role"], "hand_configuration");
    assert_eq!(body["facet_attrs"], json!({"fingers": "3", "side": "back"}));
    assert_eq!(body["classification"]["prototype"], "01-02-003");
    assert_eq!(body["classification"]["assignment"], json!({"side": "back"}));
    assert_eq!(body["image_url"], "/glyphs/01-02-003-01-02-01.png");

    let (status, body) = call_json(&app, Method::GET, "/glyphs/1-2-3", None).await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("MalformedCode"))
    );
    let (status, body) = call_json(&app, Method::GET, "/glyphs/00-01-001-01-01-01", None).await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("ZeroField"))
    );
    let (status, _) = call(&app, Method::GET, "/glyphs/09-01-001-01-01-01", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let resp = send(&app, Method::GET, "/glyphs/03-01-001-01-01-01.png", None).await;
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "image/png");
    assert_eq!(resp.headers()["cache-control"], "public, max-age=31536000, immutable");
    let bytes = body_bytes(resp).await;
    assert_eq!(&bytes[1..4], b"PNG");

    std::fs::remove_file(d.catalog_dir().join("images/03-01-001-01-01-01.png")).unwrap();
    let (status, _) = call(&app, Method::GET, "/glyphs/03-01-001-01-01-01.png", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::GET, "/glyphs/03-01-001-01-01-01", None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn sign_crud() {
    let d = Deployment::df1();
    let (_, app) = d.start();
    let sign = sample_sign();

    let (status, body) = call_json(&app, Method::POST, "/signs", Some(sign.serialize())).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = body["sign_id"].as_str().unwrap().to_owned();
    assert_eq!(id.len(), 32);
    assert!(id.bytes().all(|b| b.is_ascii_hexdigit()));

    let resp = send(&app, Method::GET, &format!("/signs/{id}"), None).await;
    assert_eq!(resp.status(), StatusCode::OK);
    assert!(resp.headers().contains_key("x-created-at"));
    let got = String::from_utf8(body_bytes(resp).await).unwrap();
    assert_eq!(got, sign.with_sign_id(id.clone()).serialize());
    assert_eq!(Sign::parse(&got).unwrap().serialize(), got);

    // last write wins
    let (edited, _) = sign.place(code("03-01-001-01-01-01"), 200, 100).unwrap();
    let (status, _) = call(&app, Method::PUT, &format!("/signs/{id}"), Some(edited.serialize())).await;
    assert_eq!(status, StatusCode::OK);
    let (_, got) = call(&app, Method::GET, &format!("/signs/{id}"), None).await;
    assert_eq!(
        String::from_utf8(got).unwrap(),
        edited.with_sign_id(id.clone()).serialize()
    );

    let (status, body) = call_json(
        &app,
        Method::PUT,
        &format!("/signs/{id}"),
        Some(sign.with_sign_id("other").serialize()),
    )
    .await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("IdMismatch"))
    );
    let (status, _) = call(&app, Method::PUT, "/signs/nope", Some(sign.serialize())).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, _) = call(&app, Method::DELETE, &format!("/signs/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, body) = call_json(&app, Method::GET, &format!("/signs/{id}"), None).await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::NOT_FOUND, Some("NotFound"))
    );
    let (status, _) = call(&app, Method::DELETE, &format!("/signs/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn client_ids_and_listing() {
    let d = Deployment::df1();
    let (_, app) = d.start();
    let sign = sample_sign();
    for id in ["zeta", "alpha", "mid"] {
        let (status, body) = call_json(&app, Method::POST, "/signs", Some(sign.with_sign_id(id).serialize())).await;
        assert_eq!(status, StatusCode::CREATED);
        assert_eq!(body["sign_id"], id);
    }
    let (status, body) = call_json(
        &app,
        Method::POST,
        "/signs",
        Some(sign.with_sign_id("alpha").serialize()),
    )
    .await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::CONFLICT, Some("Conflict"))
    );
    let (status, body) = call_json(
        &app,
        Method::POST,
        "/signs",
        Some(sign.with_sign_id("../x").serialize()),
    )
    .await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("BadSignId"))
    );

    let (_, body) = call_json(&app, Method::GET, "/signs", None).await;
    assert_eq!(body, json!(["zeta", "alpha", "mid"]));
}

#[tokio::test]
async fn bad_sign_bodies() {
    let d = Deployment::df1();
    let (_, app) = d.start();

    let mut doc: Value = serde_json::from_str(&sample_sign().serialize()).unwrap();
    doc["components"]["05-01-001-01-01-01"] = json!(1);
    let (status, body) = call_json(&app, Method::POST, "/signs", Some(doc.to_string())).await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("InvariantViolation"))
    );

    let (status, body) = call_json(&app, Method::POST, "/signs", Some("{not json".into())).await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("ParseError"))
    );

    let (alien, _) = Sign::new(10, 10)
        .unwrap()
        .place(code("09-01-001-01-01-01"), 1, 1)
        .unwrap();
    let (status, body) = call_json(&app, Method::POST, "/signs", Some(alien.serialize())).await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("UnknownGlyph"))
    );

    let (_, body) = call_json(&app, Method::GET, "/signs", None).await;
    assert_eq!(body, json!([]));
}

#[tokio::test]
async fn corrupt_record_is_a_server_error() {
    let d = Deployment::df1();
    let (_, app) = d.start();
    let mut doc: Value = serde_json::from_str(&sample_sign().with_sign_id("bad").serialize()).unwrap();
    doc["components"]["01-01-002-01-01-01"] = json!(2);
    std::fs::write(d.config.corpus_dir.join("bad.sign.json"), doc.to_string()).unwrap();

    let (status, body) = call_json(&app, Method::GET, "/signs/bad", None).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_eq!(body["error"], "CorruptRecord");
    assert!(body["detail"].as_str().unwrap().contains("stored components"));
}

#[tokio::test]
async fn statistics_and_pattern_search() {
    let d = Deployment::df1();
    let (_, app) = d.start();
    let hand = code("01-01-002-01-01-01");
    let movement = code("02-01-001-01-01-02");
    let face = code("04-01-001-01-01-01");

    let build = |id: &str, codes: &[GlyphCode]| {
        codes
            .iter()
            .fold(Sign::new(100, 100).unwrap().with_sign_id(id), |s, c| {
                s.place(*c, 50, 50).unwrap().0
            })
    };
    for sign in [
        build("s1", &[hand, hand, movement]),
        build("s2", &[hand, face]),
        build("s3", &[movement]),
    ] {
        let (status, _) = call(&app, Method::POST, "/signs", Some(sign.serialize())).await;
        assert_eq!(status, StatusCode::CREATED);
    }

    let (_, freq) = call_json(&app, Method::GET, "/stats/frequency", None).await;
    assert_eq!(freq["by_code"][hand.to_string()], 3);
    assert_eq!(freq["by_code_signwise"][hand.to_string()], 2);

    let (_, co) = call_json(&app, Method::GET, "/stats/cooccurrence", None).await;
    let pairs = co["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 2);
    assert!(pairs.contains(&json!({"a": hand.to_string(), "b": movement.to_string(), "signs": 1})));

    let (_, cats) = call_json(&app, Method::GET, "/stats/categories", None).await;
    assert_eq!(
        cats,
        json!({"facial_expression": 1, "shoulders": 0, "hand_configuration": 3, "contact": 0, "movement": 2})
    );

    let uri = format!("/signs/search?contains={hand},{movement}");
    let (_, found) = call_json(&app, Method::GET, &uri, None).await;
    assert_eq!(found, json!(["s1"]));
    let (status, body) = call_json(&app, Method::GET, "/signs/search?contains=", None).await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("EmptyPattern"))
    );
}

#[tokio::test]
async fn audit_endpoint() {
    let d = Deployment::df1();
    let (_, app) = d.start();
    let (status, body) = call_json(&app, Method::GET, "/audit", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["total"], 24);
    assert_eq!(body["classified"], 24);
    assert_eq!(body["unclassified"], json!([]));
}

#[tokio::test]
async fn events_append_in_order() {
    let d = Deployment::df1();
    let (state, app) = d.start();
    for kind in ["task_start", "glyph_placed"] {
        let body = json!({"session_id": "s1", "kind": kind, "payload": {"n": 1}}).to_string();
        let (status, _) = call(&app, Method::POST, "/events", Some(body)).await;
        assert_eq!(status, StatusCode::CREATED);
    }
    let body = json!({"session_id": "s1", "kind": "foo", "payload": {}}).to_string();
    let (status, resp) = call_json(&app, Method::POST, "/events", Some(body)).await;
    assert_eq!(
        (status, resp["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("UnknownKind"))
    );

    let log = read_log(state.events.path()).unwrap();
    let kinds: Vec<String> = log
        .iter()
        .map(|e| serde_json::to_value(e.kind).unwrap().as_str().unwrap().to_owned())
        .collect();
    assert_eq!(kinds, ["task_start", "glyph_placed"]);
    assert!(log[0].at < log[1].at);
}

#[tokio::test]
async fn serves_ui_bundle() {
    let mut d = Deployment::df1();
    let ui = d.path().join("ui");
    std::fs::create_dir_all(&ui).unwrap();
    std::fs::write(ui.join("index.html"), "<!doctype html><title>editor</title>").unwrap();
    d.config.ui_dir = Some(ui);
    let (_, app) = d.start();
    let (status, body) = call(&app, Method::GET, "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("editor"));
    let (status, _) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(status, StatusCode::OK);
}
