//! Test-collection construction: queries from titles, 200-token documents,
//! phrase-gated BM25 labels discretized with Jenks breaks, cross-lingual label
//! transfer and train/dev/test/analysis splits.

mod extract;
mod io;
pub mod jenks;
mod labels;
mod split;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::DialectCode;

pub use extract::{extract_document, extract_query, remove_lexical_shortcuts, truncate_tokens, DOCUMENT_TOKENS};
pub use io::{read_documents, read_queries, read_split, write_documents, write_queries, write_split, CollectionIoError};
pub use jenks::{jenks_breaks, jenks_classify, ClassRange, JenksError};
pub use labels::{crosslingualize, discretize_scores, label_query, synthesize_monolingual_qrels, synthesize_monolingual_qrels_parallel, CrossLingual};
pub use split::{split_dataset, SplitRatios};

/// Label reserved for the document cut from the query's own article.
pub const SELF_LABEL: u8 = 6;
/// Number of Jenks classes used for BM25-derived labels (1..=5).
pub const LABEL_CLASSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    /// Id of the source article.
    pub qid: String,
    pub dialect: DialectCode,
    pub dialect_title: String,
    /// Canonical title of the source article; dictionary entries are keyed by it.
    pub entity_title: String,
    pub german_title: Option<String>,
    /// Surface form submitted to retrieval: the dialect title, or the German
    /// title once cross-lingualized.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub dialect: DialectCode,
    pub text: String,
    pub token_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QrelsSide {
    Monolingual,
    CrossLingual,
}

/// Graded judgments, qid → doc id → label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qrels {
    pub side: QrelsSide,
    pub labels: BTreeMap<String, BTreeMap<String, u8>>,
}

impl Qrels {
    pub fn new(side: QrelsSide) -> Self {
        Self {
            side,
            labels: BTreeMap::new(),
        }
    }

    pub fn get(&self, qid: &str) -> Option<&BTreeMap<String, u8>> {
        self.labels.get(qid)
    }

    /// Number of judgments over all queries.
    pub fn judgment_count(&self) -> usize {
        self.labels.values().map(BTreeMap::len).sum()
    }

    /// Keeps only the queries accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&str) -> bool) -> Qrels {
        Qrels {
            side: self.side,
            labels: self
                .labels
                .iter()
                .filter(|(qid, _)| keep(qid))
                .map(|(q, l)| (q.clone(), l.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
    Analysis,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::Dev, Split::Test, Split::Analysis];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
            Split::Analysis => "analysis",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|split| split.as_str() == s)
            .ok_or_else(|| format!("unknown split {s:?}"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitAssignment {
    pub assignment: BTreeMap<String, Split>,
}

impl SplitAssignment {
    /// Query counts in [`Split::ALL`] order.
    pub fn counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for split in self.assignment.values() {
            counts[*split as usize] += 1;
        }
        counts
    }

    pub fn qids(&self, split: Split) -> impl Iterator<Item = &str> {
        self.assignment
            .iter()
            .filter(move |(_, s)| **s == split)
            .map(|(q, _)| q.as_str())
    }
}
