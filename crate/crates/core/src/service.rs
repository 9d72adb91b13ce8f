//! Local HTTP service for the ink pad.
//!
//! | route                 | answer                                          |
//! |-----------------------|-------------------------------------------------|
//! | `POST /api/recognize` | [`Recognition`] for `{"strokes": [...]}`        |
//! | `POST /api/echo`      | the strokes as the server parsed them           |
//! | `GET /api/model`      | the loaded [`ModelManifest`]                    |
//! | `GET /api/health`     | `{"status":"ok"}`, or 503 before a model loads  |
//!
//! Requests from `localhost` / `127.0.0.1` origins get CORS headers.
//! [`handle`] is a pure function of the loaded state and the request, so
//! the routing is testable without sockets.

use std::io::Read;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ink::{strokes_from_json, strokes_to_json, InkError, InkSample, UNLABELED};
use crate::recognizer::{ModelManifest, Recognizer};

pub const DEFAULT_PORT: u16 = 8787;
/// Request bodies larger than this are refused with 413.
pub const MAX_BODY_BYTES: u64 = 4 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizeRequest {
    pub strokes: Vec<Vec<Vec<Value>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoResponse {
    pub strokes: Vec<Vec<Vec<f64>>>,
    pub duplicates_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

/// Immutable state shared by all request handlers.
#[derive(Debug, Clone, Default)]
pub struct ServiceState {
    recognizer: Option<Recognizer>,
    manifest: Option<ModelManifest>,
}

impl ServiceState {
    /// A state with no model: everything but `/api/echo` answers 503.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_recognizer(recognizer: Recognizer) -> Self {
        Self {
            manifest: Some(recognizer.manifest()),
            recognizer: Some(recognizer),
        }
    }

    pub fn load(models: &Path) -> Result<Self> {
        Ok(Self::with_recognizer(Recognizer::load_dir(models)?))
    }

    pub fn recognizer(&self) -> Option<&Recognizer> {
        self.recognizer.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub status: u16,
    pub body: Vec<u8>,
}

impl Reply {
    fn json<T: Serialize>(status: u16, value: &T) -> Self {
        Self {
            status,
            body: serde_json::to_vec(value).expect("response serializes"),
        }
    }

    fn error(status: u16, message: impl Into<String>) -> Self {
        Self::json(
            status,
            &ErrorBody {
                error: message.into(),
            },
        )
    }
}

fn no_model() -> Reply {
    Reply::error(503, "no model loaded")
}

/// Routes one request. `path` may carry a query string, which is ignored.
pub fn handle(state: &ServiceState, method: &str, path: &str, body: &[u8]) -> Reply {
    let path = path.split('?').next().unwrap_or_default();
    match (method, path) {
        ("OPTIONS", _) => Reply {
            status: 204,
            body: Vec::new(),
        },
        ("GET", "/api/health") => match state.recognizer {
            Some(_) => Reply::json(200, &serde_json::json!({ "status": "ok" })),
            None => no_model(),
        },
        ("GET", "/api/model") => match &state.manifest {
            Some(m) => Reply::json(200, m),
            None => no_model(),
        },
        ("POST", "/api/recognize") => recognize(state, body),
        ("POST", "/api/echo") => match parse_strokes(body) {
            Ok((sample, duplicates_dropped)) => Reply::json(
                200,
                &EchoResponse {
                    strokes: strokes_to_json(sample.strokes()),
                    duplicates_dropped,
                },
            ),
            Err(reply) => reply,
        },
        (_, "/api/health" | "/api/model" | "/api/recognize" | "/api/echo") => {
            Reply::error(405, format!("{method} not allowed on {path}"))
        }
        _ => Reply::error(404, format!("no route for {path}")),
    }
}

fn parse_strokes(body: &[u8]) -> std::result::Result<(InkSample, usize), Reply> {
    let req: RecognizeRequest =
        serde_json::from_slice(body).map_err(|e| Reply::error(400, format!("malformed body: {e}")))?;
    let (strokes, dropped) = strokes_from_json(0, &req.strokes).map_err(|e| match e {
        InkError::Validation { .. } => Reply::error(422, e.to_string()),
        _ => Reply::error(400, e.to_string()),
    })?;
    let sample = InkSample::new(UNLABELED, strokes).map_err(|e| Reply::error(422, e.to_string()))?;
    Ok((sample, dropped))
}

fn recognize(state: &ServiceState, body: &[u8]) -> Reply {
    let sample = match parse_strokes(body) {
        Ok((s, _)) => s,
        Err(reply) => return reply,
    };
    let Some(recognizer) = &state.recognizer else {
        return no_model();
    };
    match recognizer.recognize(&sample) {
        Ok(r) => Reply::json(200, &r),
        Err(e @ Error::Feature(_)) => Reply::error(422, e.to_string()),
        Err(e @ Error::NoModel(_)) => Reply::error(503, e.to_string()),
        Err(e) => Reply::error(500, e.to_string()),
    }
}

/// Whether `origin` is a local development origin allowed by CORS.
pub fn is_local_origin(origin: &str) -> bool {
    let rest = origin
        .strip_prefix("http://")
        .or_else(|| origin.strip_prefix("https://"));
    let Some(rest) = rest else {
        return false;
    };
    let host = rest.split(':').next().unwrap_or_default();
    matches!(host, "localhost" | "127.0.0.1") && !rest.contains('/')
}

/// A bound HTTP server. Dropping it closes the socket.
pub struct Service {
    server: Arc<tiny_http::Server>,
    state: Arc<ServiceState>,
    stopping: Arc<AtomicBool>,
}

/// Stops a running [`Service`] from another thread.
#[derive(Clone)]
pub struct StopHandle {
    server: Arc<tiny_http::Server>,
    stopping: Arc<AtomicBool>,
    workers: usize,
}

impl StopHandle {
    pub fn stop(&self) {
        self.stopping.store(true, Ordering::SeqCst);
        for _ in 0..self.workers {
            self.server.unblock();
        }
    }
}

impl Service {
    /// Binds `addr` (e.g. `127.0.0.1:8787`, or port 0 for an ephemeral port).
    pub fn bind(state: ServiceState, addr: &str) -> Result<Self> {
        let server = tiny_http::Server::http(addr).map_err(|e| Error::Io {
            context: format!("binding {addr}"),
            source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
        })?;
        Ok(Self {
            server: Arc::new(server),
            state: Arc::new(state),
            stopping: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.server
            .server_addr()
            .to_ip()
            .expect("bound to an IP address")
    }

    pub fn stop_handle(&self, workers: usize) -> StopHandle {
        StopHandle {
            server: Arc::clone(&self.server),
            stopping: Arc::clone(&self.stopping),
            workers: workers.max(1),
        }
    }

    /// Serves requests on `workers` threads until stopped.
    pub fn run(&self, workers: usize) {
        let handles: Vec<_> = (0..workers.max(1))
            .map(|_| {
                let server = Arc::clone(&self.server);
                let state = Arc::clone(&self.state);
                let stopping = Arc::clone(&self.stopping);
                thread::spawn(move || loop {
                    match server.recv() {
                        Ok(request) => respond(&state, request),
                        Err(_) if stopping.load(Ordering::SeqCst) => break,
                        Err(_) => continue,
                    }
                })
            })
            .collect();
        for h in handles {
            let _ = h.join();
        }
    }
}

fn header(name: &str, value: &str) -> tiny_http::Header {
    tiny_http::Header::from_bytes(name.as_bytes(), value.as_bytes()).expect("valid header")
}

fn respond(state: &ServiceState, mut request: tiny_http::Request) {
    let origin = request
        .headers()
        .iter()
        .find(|h| h.field.equiv("Origin"))
        .map(|h| h.value.as_str().to_string());
    let mut body = Vec::new();
    let too_large = request
        .as_reader()
        .take(MAX_BODY_BYTES + 1)
        .read_to_end(&mut body)
        .map(|n| n as u64 > MAX_BODY_BYTES);
    let reply = match too_large {
        Ok(false) => handle(state, request.method().as_str(), request.url(), &body),
        Ok(true) => Reply::error(413, "request body too large"),
        Err(e) => Reply::error(400, format!("reading body: {e}")),
    };
    let mut response = tiny_http::Response::from_data(reply.body)
        .with_status_code(reply.status)
        .with_header(header("Content-Type", "application/json"));
    if let Some(origin) = origin.filter(|o| is_local_origin(o)) {
        response = response
            .with_header(header("Access-Control-Allow-Origin", &origin))
            .with_header(header("Access-Control-Allow-Methods", "GET, POST, OPTIONS"))
            .with_header(header("Access-Control-Allow-Headers", "Content-Type"))
            .with_header(header("Vary", "Origin"));
    }
    let _ = request.respond(response);
}
