use std::collections::BTreeMap;

use crate::lexindex::{tokenize, InvertedIndex, Token};

use super::jenks::jenks_classify;
use super::{Query, Qrels, QrelsSide, LABEL_CLASSES, SELF_LABEL};

/// Per-query min-max normalization followed by five-class Jenks breaks.
/// Labels run 1 (lowest class) to 5. All-equal scores map to 5.
pub fn discretize_scores(scores: &BTreeMap<String, f64>) -> BTreeMap<String, u8> {
    if scores.is_empty() {
        return BTreeMap::new();
    }
    let min = scores.values().copied().fold(f64::INFINITY, f64::min);
    let max = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return scores.keys().map(|id| (id.clone(), LABEL_CLASSES as u8)).collect();
    }
    let normalized: Vec<f64> = scores.values().map(|s| (s - min) / (max - min)).collect();
    let classes = jenks_classify(&normalized, LABEL_CLASSES).expect("finite non-empty scores");
    scores
        .keys()
        .zip(classes)
        .map(|(id, class)| (id.clone(), class as u8 + 1))
        .collect()
}

/// Labels for one query: documents containing any gate phrase are scored with
/// BM25 over the query terms and discretized; the self document gets 6.
pub fn label_query(index: &InvertedIndex, query_text: &str, gate_phrases: &[String], self_doc: &str) -> BTreeMap<String, u8> {
    let terms = tokenize(query_text);
    let gate: Vec<Vec<Token>> = gate_phrases.iter().map(|p| tokenize(p)).collect();
    let scores: BTreeMap<String, f64> = index
        .candidates(&terms, Some(&gate))
        .into_iter()
        .map(|d| (d.doc_id, d.score))
        .collect();
    let mut labels = discretize_scores(&scores);
    if index.contains_doc(self_doc) {
        labels.insert(self_doc.to_owned(), SELF_LABEL);
    }
    labels
}

/// Monolingual labels gated on an exact phrasal match of each dialect title.
pub fn synthesize_monolingual_qrels(index: &InvertedIndex, queries: &[Query]) -> Qrels {
    synthesize_monolingual_qrels_parallel(index, queries, 1)
}

/// Same output as [`synthesize_monolingual_qrels`] for any worker count:
/// queries are labeled independently and merged by qid.
pub fn synthesize_monolingual_qrels_parallel(index: &InvertedIndex, queries: &[Query], workers: usize) -> Qrels {
    let label = |q: &Query| {
        let gate = [q.dialect_title.clone()];
        (q.qid.clone(), label_query(index, &q.dialect_title, &gate, &q.qid))
    };
    let labels = if workers <= 1 || queries.len() < 2 {
        queries.iter().map(label).collect()
    } else {
        let chunk = queries.len().div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = queries
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(label).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("labeling worker panicked"))
                .collect()
        })
    };
    Qrels {
        side: QrelsSide::Monolingual,
        labels,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossLingual {
    pub qrels: Qrels,
    pub queries: Vec<Query>,
    /// Query ids dropped for lack of an inter-language link.
    pub dropped: Vec<String>,
}

/// Replaces each query's surface form by its German title. Labels are kept;
/// queries without a German title are dropped.
pub fn crosslingualize(qrels: &Qrels, queries: &[Query]) -> CrossLingual {
    let mut out = CrossLingual {
        qrels: Qrels {
            side: QrelsSide::CrossLingual,
            labels: BTreeMap::new(),
        },
        queries: Vec::new(),
        dropped: Vec::new(),
    };
    for query in queries {
        let Some(german) = query.german_title.as_ref().filter(|g| !g.trim().is_empty()) else {
            out.dropped.push(query.qid.clone());
            continue;
        };
        if let Some(labels) = qrels.labels.get(&query.qid) {
            out.qrels.labels.insert(query.qid.clone(), labels.clone());
        }
        out.queries.push(Query {
            text: german.clone(),
            ..query.clone()
        });
    }
    out
}
