use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use super::plugin::{Endpoint, PluginError};
use super::RunList;

#[derive(Debug, thiserror::Error)]
pub enum RerankError {
    #[error("window ({window}) must be at least step ({step}) and step at least 1")]
    InvalidWindow { window: usize, step: usize },
    #[error(transparent)]
    Plugin(#[from] PluginError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankOutcome {
    pub run: RunList,
    /// Windows left in their original order, one line each.
    pub warnings: Vec<String>,
    pub calls: usize,
}

/// Window start positions, tail first: the last `window` items, then moving
/// toward the head by `step`, with the final window clamped to start at 0.
pub(crate) fn window_starts(len: usize, window: usize, step: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let mut starts = vec![len.saturating_sub(window)];
    while let Some(&last) = starts.last() {
        if last == 0 {
            break;
        }
        starts.push(last.saturating_sub(step));
    }
    starts
}

/// Reranks every query's list with overlapping windows sent to `endpoint`.
/// Each reply must be a permutation of the window's ids; otherwise, and on
/// timeouts, the window keeps its order and a warning is recorded. An
/// unreachable endpoint aborts. Output scores are 1/rank.
pub fn rerank_sliding_window(
    run: &RunList,
    queries: &BTreeMap<String, String>,
    doc_texts: &BTreeMap<String, String>,
    endpoint: &mut dyn Endpoint,
    window: usize,
    step: usize,
    tag: &str,
) -> Result<RerankOutcome, RerankError> {
    if step == 0 || window < step {
        return Err(RerankError::InvalidWindow { window, step });
    }
    let mut outcome = RerankOutcome {
        run: RunList::new(tag),
        warnings: Vec::new(),
        calls: 0,
    };
    for (qid, entries) in &run.entries {
        let mut order: Vec<String> = entries.iter().map(|e| e.doc_id.clone()).collect();
        let query = queries.get(qid).map_or("", String::as_str);
        for start in window_starts(order.len(), window, step) {
            let end = (start + window).min(order.len());
            let slice = &order[start..end];
            let request = json!({
                "type": "rerank",
                "qid": qid,
                "query": query,
                "candidates": slice
                    .iter()
                    .map(|id| json!({"id": id, "text": doc_texts.get(id).map_or("", String::as_str)}))
                    .collect::<Vec<_>>(),
            });
            outcome.calls += 1;
            let reply = match endpoint.call(&request) {
                Ok(reply) => reply,
                Err(PluginError::Unreachable(e)) => return Err(PluginError::Unreachable(e).into()),
                Err(e) => {
                    outcome.warnings.push(format!("{qid} window [{start},{end}): {e}; order kept"));
                    continue;
                }
            };
            match parse_ordering(&reply, qid, slice) {
                Ok(permuted) => order.splice(start..end, permuted).for_each(drop),
                Err(message) => outcome.warnings.push(format!("{qid} window [{start},{end}): {message}; order kept")),
            }
        }
        outcome.run.insert_ordering(qid.clone(), order);
    }
    Ok(outcome)
}

fn parse_ordering(reply: &Value, qid: &str, sent: &[String]) -> Result<Vec<String>, String> {
    if let Some(got) = reply.get("qid").and_then(Value::as_str) {
        if got != qid {
            return Err(format!("reply for qid {got:?}"));
        }
    }
    let ordering = reply
        .get("ordering")
        .and_then(Value::as_array)
        .ok_or("reply has no ordering array")?;
    let ids: Vec<String> = ordering
        .iter()
        .map(|v| v.as_str().map(str::to_owned).ok_or("ordering holds a non-string id"))
        .collect::<Result<_, _>>()?;
    let expected: BTreeSet<&str> = sent.iter().map(String::as_str).collect();
    let returned: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
    if ids.len() != sent.len() || returned != expected {
        return Err("ordering is not a permutation of the sent ids".into());
    }
    Ok(ids)
}
