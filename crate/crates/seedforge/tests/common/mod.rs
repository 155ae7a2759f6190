//! Shared fixtures for the integration tests: an in-process HTTP server
//! serving canned routes (with Range support, per-route delays, and dynamic
//! handlers), plus helpers that build canned LLM completions, git fixture
//! repositories, and WARC archive slices.
//!
//! Each test binary uses its own subset of these helpers.
#![allow(dead_code)]

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::Duration;

// ---------------------------------------------------------------------------
// Fixture HTTP server
// ---------------------------------------------------------------------------

#[derive(Clone)]
pub struct CannedResponse {
    pub status: u16,
    pub content_type: String,
    pub body: Vec<u8>,
    pub delay: Duration,
}

impl CannedResponse {
    pub fn ok(content_type: &str, body: Vec<u8>) -> Self {
        CannedResponse {
            status: 200,
            content_type: content_type.to_string(),
            body,
            delay: Duration::ZERO,
        }
    }

    pub fn json(body: String) -> Self {
        Self::ok("application/json", body.into_bytes())
    }

    pub fn status(status: u16) -> Self {
        CannedResponse {
            status,
            content_type: "text/plain".to_string(),
            body: Vec::new(),
            delay: Duration::ZERO,
        }
    }
}

type RouteFn = Arc<dyn Fn(&str) -> CannedResponse + Send + Sync>;

#[derive(Clone)]
enum Route {
    Fixed(CannedResponse),
    Dynamic(RouteFn),
}

#[derive(Default)]
struct ServerState {
    routes: HashMap<String, Route>,
    hits: Vec<String>,
}

pub struct FixtureServer {
    addr: std::net::SocketAddr,
    state: Arc<Mutex<ServerState>>,
}

impl FixtureServer {
    pub fn start() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind fixture server");
        let addr = listener.local_addr().unwrap();
        let state = Arc::new(Mutex::new(ServerState::default()));
        let accept_state = Arc::clone(&state);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let state = Arc::clone(&accept_state);
                std::thread::spawn(move || handle(stream, state));
            }
        });
        FixtureServer { addr, state }
    }

    pub fn route(&self, path: &str, content_type: &str, body: Vec<u8>) {
        self.route_full(path, CannedResponse::ok(content_type, body));
    }

    pub fn route_html(&self, path: &str, html: &str) {
        self.route(path, "text/html; charset=utf-8", html.as_bytes().to_vec());
    }

    pub fn route_json(&self, path: &str, json: &str) {
        self.route(path, "application/json", json.as_bytes().to_vec());
    }

    pub fn route_full(&self, path: &str, response: CannedResponse) {
        self.state
            .lock()
            .unwrap()
            .routes
            .insert(path.to_string(), Route::Fixed(response));
    }

    /// Registers a handler that sees the full request target (path + query)
    /// and builds the response, e.g. for pagination fixtures.
    pub fn route_dyn<F>(&self, path: &str, handler: F)
    where
        F: Fn(&str) -> CannedResponse + Send + Sync + 'static,
    {
        self.state
            .lock()
            .unwrap()
            .routes
            .insert(path.to_string(), Route::Dynamic(Arc::new(handler)));
    }

    /// Registers a route that stalls for `delay` before answering.
    pub fn route_slow(&self, path: &str, content_type: &str, body: Vec<u8>, delay: Duration) {
        self.route_full(
            path,
            CannedResponse {
                status: 200,
                content_type: content_type.to_string(),
                body,
                delay,
            },
        );
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Request targets (path plus query) in arrival order.
    pub fn hit_targets(&self) -> Vec<String> {
        self.state.lock().unwrap().hits.clone()
    }

    /// Request paths (query stripped) in arrival order.
    pub fn hit_paths(&self) -> Vec<String> {
        self.hit_targets()
            .into_iter()
            .map(|t| t.split('?').next().unwrap_or("").to_string())
            .collect()
    }
}

fn handle(mut stream: TcpStream, state: Arc<Mutex<ServerState>>) {
    stream.set_read_timeout(Some(Duration::from_secs(10))).ok();
    let mut buf = Vec::new();
    let mut chunk = [0u8; 1024];
    // read request head (GET/HEAD only; no bodies expected)
    while !buf.windows(4).any(|w| w == b"\r\n\r\n") {
        match stream.read(&mut chunk) {
            Ok(0) => return,
            Ok(n) => buf.extend_from_slice(&chunk[..n]),
            Err(_) => return,
        }
        if buf.len() > 64 * 1024 {
            return;
        }
    }
    let head = String::from_utf8_lossy(&buf);
    let mut lines = head.lines();
    let request_line = lines.next().unwrap_or_default();
    let target = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
    let range = lines
        .filter(|l| l.to_ascii_lowercase().starts_with("range:"))
        .find_map(|l| parse_range(l.split_once(':').map(|(_, v)| v.trim()).unwrap_or("")));

    let route = {
        let mut guard = state.lock().unwrap();
        guard.hits.push(target.clone());
        let path_only = target.split('?').next().unwrap_or("").to_string();
        guard
            .routes
            .get(&target)
            .or_else(|| guard.routes.get(&path_only))
            .cloned()
    };
    let response = route.map(|r| match r {
        Route::Fixed(resp) => resp,
        Route::Dynamic(handler) => handler(&target),
    });

    let Some(resp) = response else {
        let _ = stream.write_all(
            b"HTTP/1.1 404 Not Found\r\nContent-Length: 9\r\nConnection: close\r\n\r\nnot found",
        );
        return;
    };
    if !resp.delay.is_zero() {
        std::thread::sleep(resp.delay);
    }

    let (status, body): (u16, Vec<u8>) = match range {
        Some((start, end)) if resp.status == 200 => {
            let len = resp.body.len() as u64;
            let start = start.min(len);
            let end = end.map(|e| (e + 1).min(len)).unwrap_or(len);
            (206, resp.body[start as usize..end as usize].to_vec())
        }
        _ => (resp.status, resp.body.clone()),
    };
    let reason = match status {
        200 => "OK",
        206 => "Partial Content",
        401 => "Unauthorized",
        403 => "Forbidden",
        404 => "Not Found",
        429 => "Too Many Requests",
        _ => "Status",
    };
    let head = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        resp.content_type,
        body.len()
    );
    let _ = stream.write_all(head.as_bytes());
    let _ = stream.write_all(&body);
}

fn parse_range(value: &str) -> Option<(u64, Option<u64>)> {
    let spec = value.strip_prefix("bytes=")?;
    let (start, end) = spec.split_once('-')?;
    let start: u64 = start.trim().parse().ok()?;
    let end = end.trim();
    let end = if end.is_empty() {
        None
    } else {
        Some(end.parse::<u64>().ok()?)
    };
    Some((start, end))
}

// ---------------------------------------------------------------------------
// Content builders
// ---------------------------------------------------------------------------

/// The 8-byte PNG signature (89 50 4E 47 0D 0A 1A 0A).
pub const PNG_MAGIC: &[u8] = &[0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

/// A tiny PNG-signed blob whose content (and hence digest) is unique per tag.
pub fn png(tag: &str) -> Vec<u8> {
    let mut bytes = PNG_MAGIC.to_vec();
    bytes.extend_from_slice(tag.as_bytes());
    bytes
}

/// `n` distinct plain-text lines, the shape the LLM response parser accepts.
pub fn numbered_lines(prefix: &str, n: usize) -> String {
    (1..=n).map(|i| format!("{prefix} {i:02}\n")).collect()
}

// ---------------------------------------------------------------------------
// Fixtures-directory helpers
// ---------------------------------------------------------------------------

/// Writes a canned completion for `prompt` into `<fixtures>/llm/`.
pub fn write_llm(fixtures_dir: &Path, prompt: &str, body: &str) {
    let llm = fixtures_dir.join("llm");
    std::fs::create_dir_all(&llm).unwrap();
    let key = seedforge::querygen::prompt_key(prompt);
    std::fs::write(llm.join(format!("{key}.txt")), body).unwrap();
}

/// Writes `<fixtures>/endpoints.toml` verbatim.
pub fn write_endpoints(fixtures_dir: &Path, toml_body: &str) {
    std::fs::create_dir_all(fixtures_dir).unwrap();
    std::fs::write(fixtures_dir.join("endpoints.toml"), toml_body).unwrap();
}

// ---------------------------------------------------------------------------
// Git fixture repository
// ---------------------------------------------------------------------------

/// Creates a single-commit git repository under `dir` and returns a
/// `file://` clone URL for it.
pub fn git_fixture_repo(dir: &Path, files: &[(&str, &[u8])]) -> String {
    let run = |args: &[&str]| {
        let out = Command::new("git")
            .args(args)
            .current_dir(dir)
            .env("GIT_AUTHOR_NAME", "fixture")
            .env("GIT_AUTHOR_EMAIL", "fixture@localhost")
            .env("GIT_COMMITTER_NAME", "fixture")
            .env("GIT_COMMITTER_EMAIL", "fixture@localhost")
            .output()
            .expect("git runs");
        assert!(
            out.status.success(),
            "git {:?} failed: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
    };
    std::fs::create_dir_all(dir).unwrap();
    run(&["init", "-q", "-b", "main"]);
    for (rel, content) in files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).unwrap();
        }
        std::fs::write(path, content).unwrap();
    }
    run(&["add", "-A"]);
    run(&["-c", "commit.gpgsign=false", "commit", "-q", "-m", "fixture"]);
    format!("file://{}", dir.display())
}

// ---------------------------------------------------------------------------
// WARC fixtures
// ---------------------------------------------------------------------------

/// One gzip member holding one WARC/1.0 response record wrapping an HTTP
/// message, written directly from the format definition (independent of the
/// library's own encoder).
pub fn warc_response_record(target_uri: &str, content_type: &str, payload: &[u8]) -> Vec<u8> {
    let mut http = format!(
        "HTTP/1.1 200 OK\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\n\r\n",
        payload.len()
    )
    .into_bytes();
    http.extend_from_slice(payload);

    let mut record = format!(
        "WARC/1.0\r\n\
         WARC-Type: response\r\n\
         WARC-Record-ID: <urn:uuid:00000000-0000-0000-0000-000000000000>\r\n\
         WARC-Target-URI: {target_uri}\r\n\
         Content-Type: application/http; msgtype=response\r\n\
         Content-Length: {}\r\n\r\n",
        http.len()
    )
    .into_bytes();
    record.extend_from_slice(&http);
    record.extend_from_slice(b"\r\n\r\n");

    let mut encoder = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
    encoder.write_all(&record).expect("in-memory gzip write");
    encoder.finish().expect("in-memory gzip finish")
}

/// Concatenates response records into one archive blob and produces the
/// matching CDX JSON lines (one per record).
pub fn warc_archive(
    archive_file: &str,
    entries: &[(&str, &str, &[u8])],
) -> (Vec<u8>, Vec<String>) {
    let mut archive = Vec::new();
    let mut lines = Vec::new();
    for (url, mime, payload) in entries {
        let record = warc_response_record(url, mime, payload);
        lines.push(format!(
            r#"{{"url":"{url}","mime":"{mime}","status":"200","length":"{}","offset":"{}","filename":"{archive_file}"}}"#,
            record.len(),
            archive.len(),
        ));
        archive.extend_from_slice(&record);
    }
    (archive, lines)
}

// ---------------------------------------------------------------------------
// Manifest JSON helpers
// ---------------------------------------------------------------------------

/// Parses `manifest.json` from an output directory.
pub fn read_manifest(out_dir: &Path) -> serde_json::Value {
    let raw = std::fs::read_to_string(out_dir.join("manifest.json")).expect("manifest exists");
    serde_json::from_str(&raw).expect("manifest is valid JSON")
}

/// File names (sorted) inside `<out>/corpus/`.
pub fn corpus_filenames(out_dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(out_dir.join("corpus"))
        .expect("corpus dir exists")
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    names.sort();
    names
}
