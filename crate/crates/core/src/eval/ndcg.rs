use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::collection::Qrels;
use crate::runtime::RunList;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainMode {
    /// g(rel) = rel
    #[default]
    Linear,
    /// g(rel) = 2^rel - 1
    Exponential,
}

impl GainMode {
    fn gain(self, label: u8) -> f64 {
        match self {
            GainMode::Linear => f64::from(label),
            GainMode::Exponential => 2f64.powi(i32::from(label)) - 1.0,
        }
    }
}

impl fmt::Display for GainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainMode::Linear => "linear",
            GainMode::Exponential => "exponential",
        })
    }
}

impl FromStr for GainMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(GainMode::Linear),
            "exponential" => Ok(GainMode::Exponential),
            other => Err(format!("unknown gain mode {other:?}; expected linear or exponential")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("k must be at least 1")]
    InvalidK,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub per_query: BTreeMap<String, f64>,
    /// Mean over `per_query`; 0 when no query was evaluated.
    pub mean: f64,
    pub k: usize,
    pub gain_mode: GainMode,
    /// Queries present in the qrels with no judgments.
    pub empty_qrels: Vec<String>,
    /// Run queries absent from the qrels, skipped.
    pub unjudged_run_queries: Vec<String>,
}

/// nDCG@k with a log2(rank + 1) discount. Every query with judgments is
/// evaluated; one missing from the run scores 0. Unjudged documents count as
/// label 0 and the ideal ranking sorts all judgments by label.
pub fn ndcg_at_k(run: &RunList, qrels: &Qrels, k: usize, gain: GainMode) -> Result<EvalResult, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    let discount = |i: usize| ((i + 2) as f64).log2();
    let mut per_query = BTreeMap::new();
    let mut empty_qrels = Vec::new();
    for (qid, judged) in &qrels.labels {
        if judged.is_empty() {
            empty_qrels.push(qid.clone());
            continue;
        }
        // Folding from +0.0 keeps an empty or all-zero prefix from printing as -0.
        let dcg = run
            .get(qid)
            .iter()
            .take(k)
            .enumerate()
            .map(|(i, e)| gain.gain(judged.get(&e.doc_id).copied().unwrap_or(0)) / discount(i))
            .fold(0.0, |acc, g| acc + g);
        let mut ideal: Vec<u8> = judged.values().copied().collect();
        ideal.sort_unstable_by(|a, b| b.cmp(a));
        let idcg: f64 = ideal.iter().take(k).enumerate().map(|(i, &l)| gain.gain(l) / discount(i)).sum();
        per_query.insert(qid.clone(), if idcg > 0.0 { dcg / idcg } else { 0.0 });
    }
    let unjudged_run_queries = run
        .entries
        .keys()
        .filter(|q| !qrels.labels.contains_key(*q))
        .cloned()
        .collect();
    let mean = if per_query.is_empty() {
        0.0
    } else {
        per_query.values().fold(0.0, |acc, v| acc + v) / per_query.len() as f64
    };
    Ok(EvalResult {
        per_query,
        mean,
        k,
        gain_mode: gain,
        empty_qrels,
        unjudged_run_queries,
    })
}

/// `qid<TAB>ndcg` lines followed by `all<TAB>mean`.
pub fn write_eval_tsv<W: Write>(mut out: W, result: &EvalResult) -> std::io::Result<()> {
    for (qid, value) in &result.per_query {
        writeln!(out, "{qid}\t{value:.6}")?;
    }
    writeln!(out, "all\t{:.6}", result.mean)
}
