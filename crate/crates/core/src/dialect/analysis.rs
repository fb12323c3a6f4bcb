use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::collection::{label_query, Query, Qrels};
use crate::ingest::DialectCode;
use crate::lexindex::{contains_phrase, tokenize, InvertedIndex};

use super::DialectDictionary;

/// Gate used for the analysis split's assessments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DualMode {
    /// The dialect title alone.
    Without,
    /// The dialect title or any accepted variant.
    With,
}

/// Queries whose entity has at least one accepted variant.
pub fn build_analysis_split(queries: &[Query], dictionary: &DialectDictionary) -> BTreeSet<String> {
    queries
        .iter()
        .filter(|q| !dictionary.variants(&q.dialect, &q.entity_title).is_empty())
        .map(|q| q.qid.clone())
        .collect()
}

/// Labels for one analysis query. Scoring always uses the dialect-title terms;
/// the mode only widens which documents are eligible.
pub fn synthesize_dual_qrels(index: &InvertedIndex, query: &Query, variants: &[String], mode: DualMode) -> BTreeMap<String, u8> {
    let mut gate = vec![query.dialect_title.clone()];
    if mode == DualMode::With {
        gate.extend(variants.iter().filter(|v| !tokenize(v).is_empty()).cloned());
    }
    label_query(index, &query.dialect_title, &gate, &query.qid)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExactMatchStats {
    /// Per dialect: (pairs whose document contains a phrase, judged pairs).
    pub per_dialect: BTreeMap<DialectCode, (usize, usize)>,
}

impl ExactMatchStats {
    pub fn percent(&self, dialect: &DialectCode) -> Option<f64> {
        let (hits, total) = self.per_dialect.get(dialect)?;
        (*total > 0).then(|| 100.0 * *hits as f64 / *total as f64)
    }
}

/// Share of judged (query, document) pairs whose document contains any of the
/// query's phrases as a contiguous token sequence. Documents absent from the
/// index count as non-matching.
pub fn exact_match_rate(index: &InvertedIndex, queries: &[Query], qrels: &Qrels, phrases: &BTreeMap<String, Vec<String>>) -> ExactMatchStats {
    let mut stats = ExactMatchStats::default();
    for query in queries {
        let Some(judged) = qrels.get(&query.qid) else { continue };
        let phrase_tokens: Vec<_> = phrases
            .get(&query.qid)
            .into_iter()
            .flatten()
            .map(|p| tokenize(p))
            .filter(|t| !t.is_empty())
            .collect();
        let entry = stats.per_dialect.entry(query.dialect.clone()).or_default();
        for doc in judged.keys() {
            entry.1 += 1;
            let hit = index
                .doc_tokens(doc)
                .is_some_and(|tokens| phrase_tokens.iter().any(|p| contains_phrase(tokens, p)));
            if hit {
                entry.0 += 1;
            }
        }
    }
    stats
}
