use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::WaybackError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Connection-level failure: no HTTP status was received.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("{0}")]
    Network(String),
    #[error("no recorded response for {0}")]
    NotRecorded(String),
}

/// Blocking HTTP GET.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError>;
}

#[derive(Debug, Deserialize)]
struct Recording {
    url: String,
    status: u16,
    /// File holding the body, relative to the fixture directory.
    #[serde(default)]
    body: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct RecordingFile {
    recordings: Vec<Recording>,
}

/// Replays responses listed in `<dir>/recordings.json`.
///
/// Several recordings of the same URL are served in order and the last one
/// is repeated; requests for unrecorded URLs fail without touching the
/// network.
#[derive(Debug)]
pub struct FixtureTransport {
    responses: HashMap<String, Vec<HttpResponse>>,
    served: Mutex<HashMap<String, usize>>,
    requests: Mutex<Vec<String>>,
}

impl FixtureTransport {
    pub fn open(dir: &Path) -> Result<FixtureTransport, WaybackError> {
        let index = dir.join("recordings.json");
        let text = fs::read_to_string(&index).map_err(|source| WaybackError::Io {
            path: index.display().to_string(),
            source,
        })?;
        let file: RecordingFile =
            serde_json::from_str(&text).map_err(|e| WaybackError::Fixture(format!("{}: {e}", index.display())))?;
        let mut responses: HashMap<String, Vec<HttpResponse>> = HashMap::new();
        for r in file.recordings {
            let body = match &r.body {
                Some(p) => {
                    let path = dir.join(p);
                    fs::read(&path).map_err(|source| WaybackError::Io {
                        path: path.display().to_string(),
                        source,
                    })?
                }
                None => Vec::new(),
            };
            responses
                .entry(r.url)
                .or_default()
                .push(HttpResponse { status: r.status, body });
        }
        Ok(FixtureTransport::from_responses(responses))
    }

    pub fn from_responses(responses: HashMap<String, Vec<HttpResponse>>) -> FixtureTransport {
        FixtureTransport {
            responses,
            served: Mutex::new(HashMap::new()),
            requests: Mutex::new(Vec::new()),
        }
    }

    /// URLs requested so far, in order.
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().unwrap().clone()
    }
}

impl Transport for FixtureTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError> {
        self.requests.lock().unwrap().push(url.to_owned());
        let list = self
            .responses
            .get(url)
            .filter(|l| !l.is_empty())
            .ok_or_else(|| TransportError::NotRecorded(url.to_owned()))?;
        let mut served = self.served.lock().unwrap();
        let k = served.entry(url.to_owned()).or_insert(0);
        let r = list[(*k).min(list.len() - 1)].clone();
        *k += 1;
        Ok(r)
    }
}

/// Live HTTP access that waits at least `interval` between requests.
pub struct LiveTransport {
    agent: ureq::Agent,
    interval: Duration,
    last: Mutex<Option<Instant>>,
}

/// Larger bodies are rejected.
const MAX_BODY: u64 = 64 * 1024 * 1024;

impl LiveTransport {
    pub fn new(interval: Duration, timeout: Duration) -> LiveTransport {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .user_agent(concat!("erratum/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        LiveTransport {
            agent,
            interval,
            last: Mutex::new(None),
        }
    }

    fn pace(&self) {
        let mut last = self.last.lock().unwrap();
        if let Some(t) = *last {
            let next = t + self.interval;
            let now = Instant::now();
            if next > now {
                std::thread::sleep(next - now);
            }
        }
        *last = Some(Instant::now());
    }
}

impl Default for LiveTransport {
    /// One request per second, one minute per request.
    fn default() -> Self {
        LiveTransport::new(Duration::from_secs(1), Duration::from_secs(60))
    }
}

impl Transport for LiveTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError> {
        self.pace();
        let mut response = self
            .agent
            .get(url)
            .call()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .with_config()
            .limit(MAX_BODY)
            .read_to_vec()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}
