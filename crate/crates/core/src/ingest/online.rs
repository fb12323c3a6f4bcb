use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchMode {
    Online,
    Offline,
}

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(10),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    host: String,
    title: String,
    target: Option<String>,
}

/// Resolves redirects through the MediaWiki action API, with an on-disk cache
/// keyed by (host, title). Offline mode only consults the cache.
pub struct RedirectFetcher {
    mode: FetchMode,
    cache_dir: PathBuf,
    retry: RetryPolicy,
    agent: ureq::Agent,
    network_calls: AtomicUsize,
}

impl RedirectFetcher {
    pub fn new(mode: FetchMode, cache_dir: impl Into<PathBuf>, retry: RetryPolicy) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(retry.timeout).build();
        Self {
            mode,
            cache_dir: cache_dir.into(),
            retry,
            agent,
            network_calls: AtomicUsize::new(0),
        }
    }

    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::Relaxed)
    }

    /// Returns the redirect target of `title` on `wiki_host`, or `None` when the
    /// title is not a redirect, the lookup failed, or the fetcher is offline
    /// and nothing is cached.
    pub fn fetch_redirect_online(&self, title: &str, wiki_host: &str) -> Option<String> {
        let path = self.cache_path(wiki_host, title);
        if let Some(entry) = fs::read(&path)
            .ok()
            .and_then(|bytes| serde_json::from_slice::<CacheEntry>(&bytes).ok())
        {
            return entry.target;
        }
        if self.mode == FetchMode::Offline {
            return None;
        }

        let mut backoff = self.retry.initial_backoff;
        for attempt in 1..=self.retry.attempts {
            match self.query(title, wiki_host) {
                Ok(target) => {
                    let entry = CacheEntry {
                        host: wiki_host.to_owned(),
                        title: title.to_owned(),
                        target,
                    };
                    if let Err(e) = fs::create_dir_all(&self.cache_dir)
                        .and_then(|_| fs::write(&path, serde_json::to_vec(&entry).unwrap_or_default()))
                    {
                        log::warn!("cannot cache redirect for {title:?}: {e}");
                    }
                    return entry.target;
                }
                Err(e) if attempt < self.retry.attempts => {
                    log::debug!("redirect lookup for {title:?} failed (attempt {attempt}): {e}");
                    std::thread::sleep(backoff);
                    backoff *= 2;
                }
                Err(e) => log::warn!("redirect lookup for {title:?} on {wiki_host} failed: {e}"),
            }
        }
        None
    }

    fn query(&self, title: &str, wiki_host: &str) -> Result<Option<String>, Box<dyn std::error::Error>> {
        self.network_calls.fetch_add(1, Ordering::Relaxed);
        let base = if wiki_host.contains("://") {
            wiki_host.trim_end_matches('/').to_owned()
        } else {
            format!("https://{wiki_host}")
        };
        let body: serde_json::Value = self
            .agent
            .get(&format!("{base}/w/api.php"))
            .query("action", "query")
            .query("format", "json")
            .query("redirects", "1")
            .query("titles", title)
            .call()?
            .into_json()?;
        let target = body["query"]["redirects"]
            .as_array()
            .and_then(|r| r.last())
            .and_then(|r| r["to"].as_str())
            .map(super::nfc);
        Ok(target)
    }

    fn cache_path(&self, host: &str, title: &str) -> PathBuf {
        let digest = Sha256::digest(format!("{host}\n{title}").as_bytes());
        let name: String = digest.iter().take(16).map(|b| format!("{b:02x}")).collect();
        self.cache_dir.join(format!("{name}.json"))
    }
}
