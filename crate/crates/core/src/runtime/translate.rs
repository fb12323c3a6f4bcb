use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::collection::Document;
use crate::lexindex::tokenize;

use super::plugin::{Endpoint, PluginError};

#[derive(Debug, thiserror::Error)]
pub enum TranslateError {
    #[error("translator unreachable after {completed} documents (progress is cached): {source}")]
    Unreachable { completed: usize, source: PluginError },
    #[error("translation cache {path}: {message}")]
    Cache { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    text: String,
}

/// Translations keyed by a hash of (source dialect, text). Every new entry is
/// appended and synced at once, so the cache doubles as a checkpoint.
pub struct TranslationCache {
    path: Option<PathBuf>,
    entries: BTreeMap<String, String>,
}

impl TranslationCache {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            entries: BTreeMap::new(),
        }
    }

    pub fn open(path: &Path) -> Result<Self, TranslateError> {
        let mut entries = BTreeMap::new();
        if path.exists() {
            for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                // A torn last line from an interrupted run is tolerated.
                match serde_json::from_str::<CacheLine>(&line) {
                    Ok(entry) => {
                        entries.insert(entry.key, entry.text);
                    }
                    Err(e) => log::warn!("{}:{}: skipping unreadable cache line: {e}", path.display(), i + 1),
                }
            }
        }
        Ok(Self {
            path: Some(path.to_owned()),
            entries,
        })
    }

    pub fn key(source_dialect: &str, text: &str) -> String {
        let digest = Sha256::digest(format!("{source_dialect}\0{text}").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn insert(&mut self, key: String, text: String) -> Result<(), TranslateError> {
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            let line = serde_json::to_string(&CacheLine {
                key: key.clone(),
                text: text.clone(),
            })
            .map_err(|e| TranslateError::Cache {
                path: path.clone(),
                message: e.to_string(),
            })?;
            writeln!(file, "{line}")?;
            file.sync_data()?;
        }
        self.entries.insert(key, text);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslateOutcome {
    pub docs: Vec<Document>,
    pub calls: usize,
    pub cache_hits: usize,
    /// Documents kept untranslated, with the reason.
    pub failures: Vec<(String, String)>,
}

/// Replaces each document's text with the translator's output. Ids and order
/// are kept; token counts are recomputed. Malformed replies and timeouts keep
/// the original text and are reported; an unreachable translator aborts.
pub fn translate_corpus(docs: &[Document], endpoint: &mut dyn Endpoint, cache: &mut TranslationCache) -> Result<TranslateOutcome, TranslateError> {
    let mut outcome = TranslateOutcome {
        docs: Vec::with_capacity(docs.len()),
        calls: 0,
        cache_hits: 0,
        failures: Vec::new(),
    };
    for (done, doc) in docs.iter().enumerate() {
        let key = TranslationCache::key(doc.dialect.as_str(), &doc.text);
        let translated = if let Some(text) = cache.get(&key) {
            outcome.cache_hits += 1;
            Some(text.to_owned())
        } else {
            let request = json!({
                "type": "translate",
                "id": doc.doc_id,
                "text": doc.text,
                "source_dialect": doc.dialect.as_str(),
            });
            outcome.calls += 1;
            match endpoint.call(&request) {
                Ok(reply) => match parse_translation(&reply, &doc.doc_id) {
                    Ok(text) => {
                        cache.insert(key, text.clone())?;
                        Some(text)
                    }
                    Err(message) => {
                        outcome.failures.push((doc.doc_id.clone(), message));
                        None
                    }
                },
                Err(e @ PluginError::Unreachable(_)) => {
                    return Err(TranslateError::Unreachable {
                        completed: done,
                        source: e,
                    })
                }
                Err(e) => {
                    outcome.failures.push((doc.doc_id.clone(), e.to_string()));
                    None
                }
            }
        };
        let mut out = doc.clone();
        if let Some(text) = translated {
            out.token_count = tokenize(&text).len();
            out.text = text;
        }
        outcome.docs.push(out);
    }
    Ok(outcome)
}

fn parse_translation(reply: &Value, id: &str) -> Result<String, String> {
    match reply.get("id").and_then(Value::as_str) {
        Some(got) if got == id => {}
        Some(got) => return Err(format!("reply for id {got:?}")),
        None => return Err("reply has no id".into()),
    }
    reply
        .get("text")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| "reply has no text".into())
}
