use std::time::Duration;

use erratum_core::dom::{parse_html, DomTree, ParseConfig};
use url::Url;

use crate::transport::{HttpResponse, Transport, TransportError};
use crate::{DateRange, Timestamp, WaybackError};

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveConfig {
    /// Root of the archive, e.g. `https://web.archive.org`.
    pub base_url: String,
    /// Attempts after the first one for retryable failures.
    pub retries: u32,
    /// Wait before the first retry; doubled for each further one.
    pub backoff: Duration,
    /// Elements with one of these ids are stripped from snapshots.
    pub chrome_ids: Vec<String>,
    /// Elements carrying one of these classes are stripped from snapshots.
    pub chrome_classes: Vec<String>,
}

impl Default for ArchiveConfig {
    fn default() -> Self {
        ArchiveConfig {
            base_url: "https://web.archive.org".to_owned(),
            retries: 3,
            backoff: Duration::from_secs(2),
            chrome_ids: [
                "wm-ipp-base",
                "wm-ipp",
                "wm-ipp-print",
                "donato",
                "wm-capinfo",
                "wm-btns",
            ]
            .map(String::from)
            .to_vec(),
            chrome_classes: ["wb-autocomplete-suggestions"].map(String::from).to_vec(),
        }
    }
}

/// Client for an archive exposing a CDX listing endpoint
/// (`/cdx/search/cdx`) and raw snapshot URLs (`/web/<timestamp>id_/<url>`).
pub struct Archive<T> {
    transport: T,
    config: ArchiveConfig,
}

impl<T: Transport> Archive<T> {
    pub fn new(transport: T, config: ArchiveConfig) -> Archive<T> {
        Archive { transport, config }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn config(&self) -> &ArchiveConfig {
        &self.config
    }

    fn endpoint(&self, path: &str) -> Result<Url, WaybackError> {
        let base = self.config.base_url.trim_end_matches('/');
        Url::parse(&format!("{base}{path}")).map_err(|_| WaybackError::Url(format!("{base}{path}")))
    }

    /// URL listing the snapshots of `url` captured within `range`.
    pub fn listing_url(&self, url: &str, range: DateRange) -> Result<String, WaybackError> {
        let mut u = self.endpoint("/cdx/search/cdx")?;
        u.query_pairs_mut()
            .append_pair("url", url)
            .append_pair("from", &range.from.format("%Y%m%d").to_string())
            .append_pair("to", &range.to.format("%Y%m%d").to_string())
            .append_pair("output", "json")
            .append_pair("fl", "timestamp,statuscode");
        Ok(u.into())
    }

    /// URL of the unmodified snapshot of `url` at `t`.
    pub fn snapshot_url(&self, url: &str, t: Timestamp) -> Result<String, WaybackError> {
        Ok(self.endpoint(&format!("/web/{t}id_/{url}"))?.into())
    }

    /// GET with retries on network errors, 429 and 5xx.
    fn get(&self, url: &str) -> Result<HttpResponse, WaybackError> {
        let mut wait = self.config.backoff;
        let mut attempt = 0;
        loop {
            let err = match self.transport.get(url) {
                Ok(r) if r.status == 429 || r.status >= 500 => WaybackError::Status {
                    url: url.to_owned(),
                    status: r.status,
                },
                Ok(r) => return Ok(r),
                Err(source) => WaybackError::Transport {
                    url: url.to_owned(),
                    source,
                },
            };
            if !err.is_retryable() || attempt >= self.config.retries {
                return Err(err);
            }
            log::warn!("{err}; retrying in {wait:?}");
            std::thread::sleep(wait);
            wait *= 2;
            attempt += 1;
        }
    }

    /// Timestamps of the successful captures of `url` within `range`,
    /// ascending and without duplicates.
    pub fn list_versions(&self, url: &str, range: DateRange) -> Result<Vec<Timestamp>, WaybackError> {
        let listing = self.listing_url(url, range)?;
        let response = self.get(&listing)?;
        if response.status != 200 {
            return Err(WaybackError::Status {
                url: listing,
                status: response.status,
            });
        }
        let mut out = parse_listing(&response.body).map_err(|message| WaybackError::Listing {
            url: listing.clone(),
            message,
        })?;
        out.retain(|t| range.contains(*t));
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// The snapshot of `url` at `t`, parsed, with archive chrome removed.
    pub fn fetch_version(&self, url: &str, t: Timestamp) -> Result<DomTree, WaybackError> {
        let snapshot = self.snapshot_url(url, t)?;
        let response = self.get(&snapshot)?;
        match response.status {
            200 => {}
            404 | 410 => {
                return Err(WaybackError::SnapshotGone {
                    url: url.to_owned(),
                    timestamp: t,
                    status: response.status,
                })
            }
            status => return Err(WaybackError::Status { url: snapshot, status }),
        }
        let config = ParseConfig {
            denied_ids: self.config.chrome_ids.clone(),
            denied_classes: self.config.chrome_classes.clone(),
            ..ParseConfig::default()
        };
        Ok(parse_html(&response.body, &config)?)
    }
}

/// Parses a CDX JSON listing: an array of rows whose first row names the
/// columns. Only captures with a 2xx status are kept. An empty body is an
/// empty listing.
fn parse_listing(body: &[u8]) -> Result<Vec<Timestamp>, String> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let rows: Vec<Vec<String>> = serde_json::from_slice(body).map_err(|e| e.to_string())?;
    let Some((header, rows)) = rows.split_first() else {
        return Ok(Vec::new());
    };
    let column = |name: &str| header.iter().position(|h| h == name);
    let ts = column("timestamp").ok_or("listing has no timestamp column")?;
    let status = column("statuscode");
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let cell = row.get(ts).ok_or("short listing row")?;
        if let Some(s) = status {
            if !row.get(s).is_some_and(|c| c.starts_with('2')) {
                continue;
            }
        }
        out.push(cell.parse::<Timestamp>().map_err(|e| e.to_string())?);
    }
    Ok(out)
}

impl Transport for Box<dyn Transport> {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError> {
        (**self).get(url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_skips_failed_captures() {
        let body = br#"[["timestamp","statuscode"],["20130101000000","200"],["20130102000000","302"],["20130103000000","200"]]"#;
        let got = parse_listing(body).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[1].to_string(), "20130103000000");
        assert!(parse_listing(b"").unwrap().is_empty());
        assert!(parse_listing(b"[]").unwrap().is_empty());
        assert!(parse_listing(b"{").is_err());
        assert!(parse_listing(br#"[["original"],["x"]]"#).is_err());
    }
}
