//! Network retrieval for the content-addressed store.
//!
//! Serving side: [`serve`] exposes a store read-only over HTTP/1.1 at
//! `GET /docs/<id>`, returning the raw object bytes. Fetching side:
//! [`fetch_verified`] downloads a document from such an endpoint, checks
//! that the body's digest equals the requested id, and only then admits
//! the bytes into the local store. Trust sits in the content, not the
//! transport: a wrong or hostile server can fail a fetch but can never
//! plant a wrong document.

use std::io::Read;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use thiserror::Error;

use hyx_core::{compute_id, parse_id, Document, DocumentId, Store, StoreError};

/// A remote endpoint documents can be fetched from.
#[derive(Debug, Clone)]
pub struct RemoteSource {
    base_url: String,
    timeout: Duration,
    max_size: u64,
}

impl RemoteSource {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
    pub const DEFAULT_MAX_SIZE: u64 = 64 * 1024 * 1024;

    /// A source rooted at `base_url` (e.g. `http://host:port`), with the
    /// default timeout and size cap.
    pub fn new(base_url: impl Into<String>) -> Self {
        let mut base_url = base_url.into();
        while base_url.ends_with('/') {
            base_url.pop();
        }
        RemoteSource {
            base_url,
            timeout: Self::DEFAULT_TIMEOUT,
            max_size: Self::DEFAULT_MAX_SIZE,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Caps the size of fetched documents. Panics if `max_size` is zero.
    pub fn with_max_size(mut self, max_size: u64) -> Self {
        assert!(max_size > 0, "max_size must be positive");
        self.max_size = max_size;
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    /// The URL a given document is expected at.
    pub fn document_url(&self, id: &DocumentId) -> String {
        format!("{}/docs/{}", self.base_url, id)
    }
}

/// Errors from [`fetch_verified`].
#[derive(Debug, Error)]
pub enum FetchError {
    #[error("document {0} not found on the remote")]
    NotFound(DocumentId),
    #[error("remote returned HTTP status {0}")]
    HttpStatus(u16),
    #[error("network failure: {0}")]
    Network(String),
    #[error("fetched body for {expected} hashes to {actual}; bytes discarded")]
    DigestMismatch {
        expected: DocumentId,
        actual: DocumentId,
    },
    #[error("fetched body exceeds the {limit}-byte cap")]
    TooLarge { limit: u64 },
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Fetches `<base_url>/docs/<id>`, verifies that the body's digest equals
/// `id`, and puts the document into the local store. On any verification
/// failure the bytes are discarded and the store is left untouched.
pub fn fetch_verified(
    source: &RemoteSource,
    id: &DocumentId,
    store: &Store,
) -> Result<Document, FetchError> {
    let url = source.document_url(id);
    let agent = ureq::AgentBuilder::new().timeout(source.timeout).build();
    let response = match agent.get(&url).call() {
        Ok(r) => r,
        Err(ureq::Error::Status(404, _)) => return Err(FetchError::NotFound(id.clone())),
        Err(ureq::Error::Status(code, _)) => return Err(FetchError::HttpStatus(code)),
        Err(ureq::Error::Transport(t)) => return Err(FetchError::Network(t.to_string())),
    };

    let mut bytes = Vec::new();
    response
        .into_reader()
        .take(source.max_size + 1)
        .read_to_end(&mut bytes)
        .map_err(|e| FetchError::Network(e.to_string()))?;
    if bytes.len() as u64 > source.max_size {
        return Err(FetchError::TooLarge {
            limit: source.max_size,
        });
    }

    let actual = compute_id(&bytes, id.algorithm());
    if actual != *id {
        return Err(FetchError::DigestMismatch {
            expected: id.clone(),
            actual,
        });
    }

    let doc = Document::new(bytes);
    // Store under the verified id's own algorithm so the requested id
    // resolves locally regardless of the store's default.
    store.put_with(&doc, id.algorithm())?;
    Ok(doc)
}

/// Errors from [`serve`].
#[derive(Debug, Error)]
pub enum ServeError {
    #[error("failed to bind endpoint: {0}")]
    Bind(String),
}

/// A running read-only endpoint. Shuts down when dropped.
pub struct ServerHandle {
    server: Arc<tiny_http::Server>,
    stop: Arc<AtomicBool>,
    workers: Vec<JoinHandle<()>>,
    addr: SocketAddr,
}

impl ServerHandle {
    /// The address the endpoint actually bound, useful with `:0` binds.
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops the accept loop and joins the worker threads.
    pub fn shutdown(self) {
        drop(self);
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        self.server.unblock();
        for worker in self.workers.drain(..) {
            let _ = worker.join();
        }
    }
}

const WORKERS: usize = 4;

/// Serves the store read-only at `GET /docs/<id>`.
///
/// Unknown ids answer 404, malformed ids 400, non-GET methods 405. The
/// body is the raw object, `Content-Type: application/octet-stream`.
pub fn serve(store: Arc<Store>, bind: &str) -> Result<ServerHandle, ServeError> {
    let server =
        Arc::new(tiny_http::Server::http(bind).map_err(|e| ServeError::Bind(e.to_string()))?);
    let addr = server
        .server_addr()
        .to_ip()
        .expect("http server binds a tcp address");
    let stop = Arc::new(AtomicBool::new(false));
    let workers = (0..WORKERS)
        .map(|_| {
            let server = Arc::clone(&server);
            let store = Arc::clone(&store);
            let stop = Arc::clone(&stop);
            std::thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    match server.recv_timeout(Duration::from_millis(50)) {
                        Ok(Some(request)) => handle(request, &store),
                        Ok(None) => continue,
                        Err(_) => break,
                    }
                }
            })
        })
        .collect();
    Ok(ServerHandle {
        server,
        stop,
        workers,
        addr,
    })
}

fn handle(request: tiny_http::Request, store: &Store) {
    let response = respond_to(request.method(), request.url(), store);
    // A client hanging up mid-response is its own problem.
    let _ = request.respond(response);
}

fn respond_to(
    method: &tiny_http::Method,
    url: &str,
    store: &Store,
) -> tiny_http::Response<std::io::Cursor<Vec<u8>>> {
    let plain = |code: u16, body: &str| {
        tiny_http::Response::from_data(body.as_bytes().to_vec()).with_status_code(code)
    };

    if *method != tiny_http::Method::Get {
        return plain(405, "method not allowed: endpoint is read-only\n");
    }
    let path = url.split('?').next().unwrap_or(url);
    let Some(raw_id) = path.strip_prefix("/docs/") else {
        return plain(404, "not found: try /docs/<id>\n");
    };
    let id = match parse_id(&percent_decode(raw_id)) {
        Ok(id) => id,
        Err(e) => return plain(400, &format!("bad document id: {e}\n")),
    };
    match store.get(&id) {
        Ok(doc) => {
            let header = tiny_http::Header::from_bytes(
                &b"Content-Type"[..],
                &b"application/octet-stream"[..],
            )
            .expect("static header is valid");
            tiny_http::Response::from_data(doc.into_bytes()).with_header(header)
        }
        Err(StoreError::NotFound(_)) => plain(404, "document not found\n"),
        Err(e) => plain(500, &format!("store error: {e}\n")),
    }
}

// Minimal percent-decoding for the id path segment.
fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            if let Some(hex) = bytes.get(i + 1..i + 3) {
                if let Ok(b) = u8::from_str_radix(std::str::from_utf8(hex).unwrap_or("zz"), 16) {
                    out.push(b);
                    i += 3;
                    continue;
                }
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}
