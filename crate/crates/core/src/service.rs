//! Line-delimited JSON prediction service.
//!
//! Each request is one JSON object per line and gets one JSON response line:
//!
//! ```text
//! {"kind":"predict","url":"/a","window":2}   -> {"window":["/b","/c"],"level":2,"class":1}
//! {"kind":"observe","url":"/a","session":"s1"} -> {"ok":true}
//! {"kind":"snapshot"}                          -> {"snapshot":"<model dump>"}
//! {"kind":"shutdown"}                          -> {"ok":true}
//! ```
//!
//! Observes are applied one at a time under a write lock; predictions read
//! either the state before or after an observe, never a partial one.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::model::Model;
use crate::predict::predict;
use crate::update::{apply_event, record_access, AccessOutcome, Event, UpdateConfig, UpdateError};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ServiceRequest {
    Predict {
        url: String,
        #[serde(default)]
        window: Option<usize>,
    },
    Observe {
        url: String,
        #[serde(default)]
        session: Option<String>,
    },
    Snapshot,
    Shutdown,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ServiceResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ServiceResponse {
    fn ok() -> Self {
        Self { ok: Some(true), ..Default::default() }
    }

    fn error(msg: impl Into<String>) -> Self {
        Self { error: Some(msg.into()), ..Default::default() }
    }
}

/// Shared engine state behind the service.
pub struct Engine {
    model: RwLock<Model>,
    cfg: UpdateConfig,
    default_window: usize,
    stopping: AtomicBool,
}

impl Engine {
    pub fn new(model: Model, cfg: UpdateConfig, default_window: usize) -> Self {
        Self { model: RwLock::new(model), cfg, default_window, stopping: AtomicBool::new(false) }
    }

    /// Counts one access at the next tick and runs the sweeps when due.
    pub fn observe(&self, url: &str) -> Result<AccessOutcome, UpdateError> {
        let mut model = self.model.write().unwrap_or_else(|e| e.into_inner());
        let prev = model.tick();
        let now = prev + 1;
        let outcome = record_access(&mut model, url, now)?;
        model.set_tick(now);
        if self.cfg.sweep_due(prev, now) {
            apply_event(&mut model, &self.cfg, &Event::Sweep { tick: now })?;
        }
        Ok(outcome)
    }

    pub fn snapshot(&self) -> String {
        self.model.read().unwrap_or_else(|e| e.into_inner()).dump()
    }

    pub fn is_stopping(&self) -> bool {
        self.stopping.load(Ordering::SeqCst)
    }

    pub fn handle(&self, req: ServiceRequest) -> ServiceResponse {
        match req {
            ServiceRequest::Predict { url, window } => {
                let model = self.model.read().unwrap_or_else(|e| e.into_inner());
                let w = window.unwrap_or(self.default_window);
                match predict(&model, &url, w) {
                    Ok(p) => {
                        let r = model.get(&url).expect("predict succeeded");
                        ServiceResponse {
                            window: Some(p.window),
                            level: Some(r.level),
                            class: Some(r.class_no),
                            ..Default::default()
                        }
                    }
                    Err(e) => ServiceResponse::error(e.to_string()),
                }
            }
            ServiceRequest::Observe { url, .. } => match self.observe(&url) {
                Ok(_) => ServiceResponse::ok(),
                Err(e) => ServiceResponse::error(e.to_string()),
            },
            ServiceRequest::Snapshot => {
                ServiceResponse { snapshot: Some(self.snapshot()), ..Default::default() }
            }
            ServiceRequest::Shutdown => {
                self.stopping.store(true, Ordering::SeqCst);
                ServiceResponse::ok()
            }
        }
    }

    /// Handles one request line and returns the response line (no newline).
    pub fn handle_line(&self, line: &str) -> String {
        let resp = match serde_json::from_str::<ServiceRequest>(line) {
            Ok(req) => self.handle(req),
            Err(e) => ServiceResponse::error(format!("malformed request: {e}")),
        };
        serde_json::to_string(&resp).expect("response serializes")
    }
}

fn serve_connection(engine: &Engine, stream: TcpStream) -> io::Result<()> {
    let mut writer = stream.try_clone()?;
    let reader = BufReader::new(stream);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut resp = engine.handle_line(&line);
        resp.push('\n');
        writer.write_all(resp.as_bytes())?;
        writer.flush()?;
        if engine.is_stopping() {
            break;
        }
    }
    Ok(())
}

/// Accepts connections until a shutdown request arrives, then writes the
/// final snapshot to `snapshot_out` (when given) and returns it.
pub fn serve(
    engine: Arc<Engine>,
    listener: TcpListener,
    snapshot_out: Option<PathBuf>,
) -> io::Result<String> {
    let addr = listener.local_addr()?;
    for stream in listener.incoming() {
        if engine.is_stopping() {
            break;
        }
        let stream = match stream {
            Ok(s) => s,
            Err(_) => continue,
        };
        let engine = Arc::clone(&engine);
        std::thread::spawn(move || {
            let _ = serve_connection(&engine, stream);
            if engine.is_stopping() {
                // wake the accept loop so it can observe the flag
                let _ = TcpStream::connect(addr);
            }
        });
    }
    let snapshot = engine.snapshot();
    if let Some(path) = snapshot_out {
        std::fs::write(path, &snapshot)?;
    }
    Ok(snapshot)
}
