//! First-stage retrieval, the external plugin protocol, sliding-window
//! reranking and translate-test corpus preparation.

mod plugin;
mod rerank;
mod translate;

use std::collections::BTreeMap;

use crate::lexindex::{IndexError, InvertedIndex, ScoredDoc};

pub use plugin::{connect, Endpoint, EndpointKind, FnEndpoint, HttpEndpoint, PluginEndpoint, PluginError, SubprocessEndpoint, Transport};
pub use rerank::{rerank_sliding_window, RerankError, RerankOutcome};
pub use translate::{translate_corpus, TranslateError, TranslateOutcome, TranslationCache};

/// Default first-stage depth handed to rerankers.
pub const FIRST_STAGE_DEPTH: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub score: f64,
    pub rank: usize,
}

/// Ranked results per query. Ranks are contiguous from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RunList {
    pub tag: String,
    pub entries: BTreeMap<String, Vec<RunEntry>>,
}

impl RunList {
    pub fn new(tag: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Stores `docs` for `qid` in the given order, assigning ranks from 1.
    pub fn insert_ranked(&mut self, qid: impl Into<String>, docs: impl IntoIterator<Item = (String, f64)>) {
        let entries = docs
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RunEntry {
                doc_id,
                score,
                rank: i + 1,
            })
            .collect();
        self.entries.insert(qid.into(), entries);
    }

    /// Stores an order without scores: the document at rank r scores 1/r.
    pub fn insert_ordering(&mut self, qid: impl Into<String>, docs: impl IntoIterator<Item = String>) {
        let docs = docs.into_iter().enumerate().map(|(i, d)| (d, 1.0 / (i + 1) as f64));
        self.insert_ranked(qid, docs);
    }

    pub fn get(&self, qid: &str) -> &[RunEntry] {
        self.entries.get(qid).map_or(&[], Vec::as_slice)
    }

    pub fn ranked_ids(&self, qid: &str) -> Vec<&str> {
        self.get(qid).iter().map(|e| e.doc_id.as_str()).collect()
    }
}

/// Unfiltered BM25 top-`k` per query. Queries with no matching document get an
/// empty list; lists are never padded.
pub fn first_stage<'a>(index: &InvertedIndex, queries: impl IntoIterator<Item = (&'a str, &'a str)>, k: usize, tag: &str) -> Result<RunList, IndexError> {
    let mut run = RunList::new(tag);
    for (qid, text) in queries {
        let hits = index.search(text, k, None)?;
        run.insert_ranked(qid, hits.into_iter().map(|ScoredDoc { doc_id, score }| (doc_id, score)));
    }
    Ok(run)
}
