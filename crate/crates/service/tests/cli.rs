//! Tests that drive the real binary.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::Duration;

use glyphforge_core::{fixtures, GlyphCode, Sign, VersionMap};
use serde_json::{json, Value};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_glyphforge"));
    cmd.env_remove("GLYPHFORGE_PORT")
        .env_remove("GLYPHFORGE_CORPUS_DIR")
        .env("RUST_LOG", "info");
    cmd
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn df1(dir: &Path) -> PathBuf {
    let catalog = dir.join("catalog");
    fixtures::write_fixture(&catalog, &fixtures::df1_catalog(), Some(&fixtures::df1_schema()), true).unwrap();
    catalog
}

struct Server {
    child: Child,
    port: u16,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Minimal HTTP/1.1 client: one request per connection.
fn http(port: u16, method: &str, path: &str, body: Option<&str>) -> (u16, String) {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    let body = body.unwrap_or("");
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let (head, rest) = raw.split_once("\r\n\r\n").unwrap();
    let status = head.split_whitespace().nth(1).unwrap().parse().unwrap();
    (status, rest.to_owned())
}

fn start(args: &[&str], envs: &[(&str, &str)], port: Option<u16>) -> Server {
    let port_value = port.unwrap_or_else(free_port);
    let mut cmd = bin();
    cmd.arg("serve").args(args).envs(envs.iter().copied());
    if port.is_some() {
        cmd.args(["--port", &port_value.to_string()]);
    }
    let mut child = cmd.stdout(Stdio::null()).stderr(Stdio::piped()).spawn().unwrap();

    // wait for the "listening" line so we know the socket is bound
    let stderr = child.stderr.take().unwrap();
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(stderr).lines().map_while(Result::ok) {
            if let Some(addr) = line.split("addr=").nth(1) {
                let port: u16 = addr
                    .split_whitespace()
                    .next()
                    .unwrap()
                    .rsplit(':')
                    .next()
                    .unwrap()
                    .parse()
                    .unwrap();
                let _ = tx.send(port);
            }
        }
    });
    let bound = rx.recv_timeout(Duration::from_secs(30)).expect("server did not start");
    Server { child, port: bound }
}

fn serve_args(dir: &Path, catalog: &Path) -> Vec<String> {
    vec![
        "--manifest".into(),
        catalog.join("manifest.jsonl").display().to_string(),
        "--schema".into(),
        catalog.join("schema.json").display().to_string(),
        "--corpus-dir".into(),
        dir.join("corpus").display().to_string(),
        "--log-dir".into(),
        dir.join("logs").display().to_string(),
    ]
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[test]
fn serves_health_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = df1(dir.path());
    let args = serve_args(dir.path(), &catalog);
    let server = start(&strs(&args), &[], Some(free_port()));
    let (status, body) = http(server.port, "GET", "/health", None);
    assert_eq!(status, 200);
    assert_eq!(
        serde_json::from_str::<Value>(&body).unwrap(),
        json!({"status": "ok", "glyphs": 24})
    );
}

#[test]
fn sign_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = df1(dir.path());
    let args = serve_args(dir.path(), &catalog);
    let (sign, _) = Sign::new(400, 400)
        .unwrap()
        .place("01-02-001-01-02-01".parse().unwrap(), 10, 20)
        .unwrap();

    let server = start(&strs(&args), &[], Some(free_port()));
    let (status, body) = http(server.port, "POST", "/signs", Some(&sign.serialize()));
    assert_eq!(status, 201, "{body}");
    let id = serde_json::from_str::<Value>(&body).unwrap()["sign_id"]
        .as_str()
        .unwrap()
        .to_owned();
    let (_, before) = http(server.port, "GET", &format!("/signs/{id}"), None);
    drop(server);

    let server = start(&strs(&args), &[], Some(free_port()));
    let (status, after) = http(server.port, "GET", &format!("/signs/{id}"), None);
    assert_eq!(status, 200);
    assert_eq!(after, before);
    assert_eq!(after, sign.with_sign_id(id).serialize());
}

#[test]
fn env_overrides_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = df1(dir.path());
    let env_corpus = dir.path().join("env-corpus");
    let env_port = free_port().to_string();
    let base = [
        "--manifest".to_owned(),
        catalog.join("manifest.jsonl").display().to_string(),
        "--schema".to_owned(),
        catalog.join("schema.json").display().to_string(),
        "--log-dir".to_owned(),
        dir.path().join("logs").display().to_string(),
    ];
    let envs = [
        ("GLYPHFORGE_PORT", env_port.as_str()),
        ("GLYPHFORGE_CORPUS_DIR", env_corpus.to_str().unwrap()),
    ];
    let sign = Sign::new(10, 10).unwrap().with_sign_id("from-env").serialize();

    let server = start(&strs(&base), &envs, None);
    assert_eq!(server.port.to_string(), env_port);
    assert_eq!(http(server.port, "POST", "/signs", Some(&sign)).0, 201);
    assert!(env_corpus.join("from-env.sign.json").exists());
    drop(server);

    let flag_corpus = dir.path().join("flag-corpus");
    let mut args = base.to_vec();
    args.extend(["--corpus-dir".to_owned(), flag_corpus.display().to_string()]);
    let flag_port = free_port();
    let server = start(&strs(&args), &envs, Some(flag_port));
    assert_eq!(server.port, flag_port);
    assert_eq!(http(server.port, "POST", "/signs", Some(&sign)).0, 201);
    assert!(flag_corpus.join("from-env.sign.json").exists());
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().unwrap()
}

#[test]
fn startup_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = df1(dir.path());

    let text = std::fs::read_to_string(catalog.join("manifest.jsonl")).unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, format!("{}\n", text.lines().next().unwrap())).unwrap();
    let mut args = serve_args(dir.path(), &catalog);
    args[1] = empty.display().to_string();
    let out = run(bin()
        .arg("serve")
        .args(&args)
        .args(["--port", &free_port().to_string()]));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("EmptyCatalog"));

    // a regular file where the corpus directory should be
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, "").unwrap();
    let mut args = serve_args(dir.path(), &catalog);
    args[5] = blocker.join("corpus").display().to_string();
    let out = run(bin()
        .arg("serve")
        .args(&args)
        .args(["--port", &free_port().to_string()]));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("corpus directory"));
}

#[test]
fn offline_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("fx");
    let out = run(bin().args(["fixture", "--out"]).arg(&fixture));
    assert!(out.status.success());

    let cache = dir.path().join("cache/manifest.jsonl");
    let out = run(bin()
        .args(["ingest", "--manifest"])
        .arg(fixture.join("manifest.jsonl"))
        .arg("--out")
        .arg(&cache));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["glyphs"], 24);
    assert_eq!(report["warnings"], json!([]));
    assert_eq!(
        std::fs::read(&cache).unwrap(),
        std::fs::read(fixture.join("manifest.jsonl")).unwrap()
    );

    let out = run(bin()
        .args(["audit", "--schema"])
        .arg(fixture.join("schema.json"))
        .arg("--manifest")
        .arg(fixture.join("manifest.jsonl")));
    let audit: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(audit["classified"], 24);

    let corpus = dir.path().join("corpus");
    std::fs::create_dir_all(&corpus).unwrap();
    let a: GlyphCode = "01-01-001-01-01-01".parse().unwrap();
    let b: GlyphCode = "02-01-001-01-01-01".parse().unwrap();
    let (sign, _) = Sign::new(50, 50).unwrap().with_sign_id("one").place(a, 1, 1).unwrap();
    let (sign, _) = sign.place(b, 2, 2).unwrap();
    std::fs::write(corpus.join("one.sign.json"), sign.serialize()).unwrap();
    let out = run(bin()
        .args(["stats", "--corpus"])
        .arg(&corpus)
        .arg("--catalog")
        .arg(fixture.join("manifest.jsonl")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stats: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["placements"], 2);
    assert_eq!(stats["cooccurrence"]["pairs"][0]["signs"], 1);
    assert_eq!(stats["categories"]["movement"], 1);

    // swap the two codes, then swap them back
    let map = VersionMap::new("DF-1", "DF-1b", [(a, b), (b, a)]).unwrap();
    let map_path = dir.path().join("map.json");
    std::fs::write(&map_path, map.to_json()).unwrap();
    let moved = dir.path().join("moved.sign.json");
    let back = dir.path().join("back.sign.json");
    let input = corpus.join("one.sign.json");
    for (from, to, inverse) in [(&input, &moved, false), (&moved, &back, true)] {
        let mut cmd = bin();
        cmd.args(["migrate", "--map"])
            .arg(&map_path)
            .arg("--in")
            .arg(from)
            .arg("--out")
            .arg(to);
        if inverse {
            cmd.arg("--inverse");
        }
        let out = run(&mut cmd);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let moved = Sign::parse(&std::fs::read_to_string(&moved).unwrap()).unwrap();
    assert_eq!(moved.placements()[0].code, b);
    assert_eq!(std::fs::read_to_string(&back).unwrap(), sign.serialize());

    // unmapped codes fail loudly
    let partial = VersionMap::new("DF-1", "DF-1b", [(a, b)]).unwrap();
    std::fs::write(&map_path, partial.to_json()).unwrap();
    let out = run(bin()
        .args(["migrate", "--map"])
        .arg(&map_path)
        .arg("--in")
        .arg(&input)
        .arg("--out")
        .arg(dir.path().join("never.sign.json")));
    assert!(!out.status.success());
    assert!(!dir.path().join("never.sign.json").exists());
}
