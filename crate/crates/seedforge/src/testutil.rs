//! In-process HTTP fixture server for unit tests. Serves canned routes on a
//! loopback port, with optional per-route delay and Range support.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::time::Duration;

#[derive(Clone)]
pub(crate) struct CannedResponse {
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

pub(crate) struct FixtureServer {
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
        self.route_full(
            path,
            CannedResponse {
                status: 200,
                content_type: content_type.to_string(),
                body,
                delay: Duration::ZERO,
            },
        );
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
    stream
        .set_read_timeout(Some(Duration::from_secs(10)))
        .ok();
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
