use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use erratum_core::dom::to_html;
use serde::{Deserialize, Serialize};

use crate::transport::Transport;
use crate::{build_pairs, Archive, DateRange, Timestamp, WaybackError, DEFAULT_MAX_PAIRS, GAP_BUCKETS};

#[derive(Debug, Clone, PartialEq)]
pub struct WaybackOptions {
    pub range: DateRange,
    pub buckets: Vec<u32>,
    /// Pairs kept per URL.
    pub max_pairs: usize,
    pub seed: u64,
    /// URLs processed concurrently.
    pub jobs: usize,
}

impl WaybackOptions {
    pub fn new(range: DateRange) -> WaybackOptions {
        WaybackOptions {
            range,
            buckets: GAP_BUCKETS.to_vec(),
            max_pairs: DEFAULT_MAX_PAIRS,
            seed: 0,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Ok,
    Skipped,
}

/// One line of `manifest.json`. A URL whose listing fails, or that yields
/// no pair, gets a single skipped entry without timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestEntry {
    pub url: String,
    pub t1: Option<Timestamp>,
    pub t2: Option<Timestamp>,
    pub gap_days: Option<u32>,
    /// Snapshot files relative to the dataset directory, `t1` first.
    pub files: Vec<String>,
    pub status: EntryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl ManifestEntry {
    fn skipped(url: &str, reason: String) -> ManifestEntry {
        ManifestEntry {
            url: url.to_owned(),
            t1: None,
            t2: None,
            gap_days: None,
            files: Vec::new(),
            status: EntryStatus::Skipped,
            reason: Some(reason),
        }
    }
}

/// Directory name for a URL: scheme dropped, other punctuation turned into
/// dashes.
pub fn site_slug(url: &str) -> String {
    let rest = url.split_once("://").map_or(url, |(_, r)| r);
    let mut slug = String::with_capacity(rest.len());
    for c in rest.chars() {
        if c.is_ascii_alphanumeric() || c == '.' {
            slug.push(c.to_ascii_lowercase());
        } else if !slug.ends_with('-') {
            slug.push('-');
        }
    }
    let slug = slug.trim_matches(['-', '.']).to_owned();
    if slug.is_empty() {
        "site".to_owned()
    } else {
        slug
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> WaybackError + '_ {
    move |source| WaybackError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Lists, pairs and fetches the versions of every URL into `out`, writing
/// `out/<slug>/<timestamp>.html` and `out/manifest.json`. Failures are
/// recorded in the manifest with a reason; only local I/O errors abort.
pub fn build_dataset<T: Transport>(
    archive: &Archive<T>,
    urls: &[String],
    options: &WaybackOptions,
    out: &Path,
) -> Result<Vec<ManifestEntry>, WaybackError> {
    fs::create_dir_all(out).map_err(io(out))?;
    let mut slugs = Vec::with_capacity(urls.len());
    let mut used: HashMap<String, usize> = HashMap::new();
    for url in urls {
        let base = site_slug(url);
        let n = used.entry(base.clone()).or_insert(0);
        *n += 1;
        slugs.push(if *n == 1 { base } else { format!("{base}-{n}") });
    }

    type Slot = Mutex<Option<Result<Vec<ManifestEntry>, WaybackError>>>;
    let results: Vec<Slot> = urls.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..options.jobs.clamp(1, urls.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= urls.len() {
                    break;
                }
                let r = site_entries(archive, &urls[i], &slugs[i], options, out);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });

    let mut manifest = Vec::new();
    for r in results {
        manifest.extend(r.into_inner().unwrap().expect("every URL is processed")?);
    }
    let path = out.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io(&path))?;
    Ok(manifest)
}

fn site_entries<T: Transport>(
    archive: &Archive<T>,
    url: &str,
    slug: &str,
    options: &WaybackOptions,
    out: &Path,
) -> Result<Vec<ManifestEntry>, WaybackError> {
    let versions = match archive.list_versions(url, options.range) {
        Ok(v) => v,
        Err(e) => {
            log::warn!("{url}: {e}");
            return Ok(vec![ManifestEntry::skipped(url, format!("{}: {e}", e.reason()))]);
        }
    };
    let pairs = build_pairs(url, &versions, &options.buckets, options.max_pairs, options.seed);
    if pairs.is_empty() {
        let reason = format!("no-pairs: {} versions, none at a target gap", versions.len());
        return Ok(vec![ManifestEntry::skipped(url, reason)]);
    }
    let dir = out.join(slug);
    fs::create_dir_all(&dir).map_err(io(&dir))?;
    // Each snapshot is fetched once, however many pairs use it.
    let mut fetched: HashMap<Timestamp, Result<String, String>> = HashMap::new();
    let mut fetch = |t: Timestamp| -> Result<Result<String, String>, WaybackError> {
        if let Some(r) = fetched.get(&t) {
            return Ok(r.clone());
        }
        let r = match archive.fetch_version(url, t) {
            Ok(tree) => {
                let name = format!("{slug}/{t}.html");
                let path = out.join(&name);
                fs::write(&path, to_html(&tree)).map_err(io(&path))?;
                Ok(name)
            }
            Err(e) => {
                log::warn!("{url} at {t}: {e}");
                Err(format!("{}: {e}", e.reason()))
            }
        };
        fetched.insert(t, r.clone());
        Ok(r)
    };
    let mut entries = Vec::with_capacity(pairs.len());
    for p in pairs {
        let (a, b) = (fetch(p.t1)?, fetch(p.t2)?);
        let mut entry = ManifestEntry {
            url: p.url,
            t1: Some(p.t1),
            t2: Some(p.t2),
            gap_days: Some(p.gap_days),
            files: Vec::new(),
            status: EntryStatus::Ok,
            reason: None,
        };
        match (a, b) {
            (Ok(x), Ok(y)) => entry.files = vec![x, y],
            (Err(e), _) | (_, Err(e)) => {
                entry.status = EntryStatus::Skipped;
                entry.reason = Some(e);
            }
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Reads `dir/manifest.json`.
pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>, WaybackError> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(io(&path))?;
    serde_json::from_str(&text).map_err(|e| WaybackError::Manifest(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(site_slug("https://www.example.com/news/"), "www.example.com-news");
        assert_eq!(site_slug("http://a.org/?q=1&b"), "a.org-q-1-b");
        assert_eq!(site_slug("://"), "site");
    }
}
