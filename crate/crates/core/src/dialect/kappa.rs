use serde::{Deserialize, Serialize};

use super::judgments::{effective_decisions, Decision, Judgment};
use super::DialectError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub annotator_pair: (String, String),
    pub n_items: usize,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    pub kappa: f64,
}

/// Cohen's kappa over candidates both annotators accepted or rejected.
/// Skips on either side drop the item.
pub fn cohen_kappa(log: &[Judgment], a: &str, b: &str) -> Result<KappaReport, DialectError> {
    let effective = effective_decisions(log);
    // (accept, accept), (accept, reject), (reject, accept), (reject, reject)
    let mut table = [[0usize; 2]; 2];
    for ((annotator, candidate), decision_a) in &effective {
        if *annotator != a {
            continue;
        }
        let Some(decision_b) = effective.get(&(b, *candidate)) else {
            continue;
        };
        let (Some(x), Some(y)) = (category(*decision_a), category(*decision_b)) else {
            continue;
        };
        table[x][y] += 1;
    }
    let n = table.iter().flatten().sum::<usize>();
    if n == 0 {
        return Err(DialectError::NoOverlap {
            a: a.to_owned(),
            b: b.to_owned(),
        });
    }
    let total = n as f64;
    let observed = (table[0][0] + table[1][1]) as f64 / total;
    let a_accept = (table[0][0] + table[0][1]) as f64 / total;
    let b_accept = (table[0][0] + table[1][0]) as f64 / total;
    let expected = a_accept * b_accept + (1.0 - a_accept) * (1.0 - b_accept);
    // p_e = 1 only when both used a single, shared category, so p_o = 1 too.
    let kappa = if expected >= 1.0 {
        1.0
    } else {
        (observed - expected) / (1.0 - expected)
    };
    Ok(KappaReport {
        annotator_pair: (a.to_owned(), b.to_owned()),
        n_items: n,
        observed_agreement: observed,
        expected_agreement: expected,
        kappa,
    })
}

fn category(decision: Decision) -> Option<usize> {
    match decision {
        Decision::Accept => Some(0),
        Decision::Reject => Some(1),
        Decision::Skip => None,
    }
}
