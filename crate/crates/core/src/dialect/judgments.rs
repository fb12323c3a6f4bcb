use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::DialectError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
    Skip,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
            Decision::Skip => "skip",
        })
    }
}

impl FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "accept" => Ok(Decision::Accept),
            "reject" => Ok(Decision::Reject),
            "skip" => Ok(Decision::Skip),
            other => Err(format!("unknown decision {other:?}; expected accept, reject or skip")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub annotator_id: String,
    pub candidate_id: String,
    pub decision: Decision,
    pub timestamp: DateTime<Utc>,
}

/// The effective decision per (annotator, candidate): the latest timestamp
/// wins, and among equal timestamps the one appearing later in `log`.
pub fn effective_decisions(log: &[Judgment]) -> BTreeMap<(&str, &str), Decision> {
    let mut latest: BTreeMap<(&str, &str), (&DateTime<Utc>, Decision)> = BTreeMap::new();
    for j in log {
        let key = (j.annotator_id.as_str(), j.candidate_id.as_str());
        match latest.get(&key) {
            Some((ts, _)) if *ts > &j.timestamp => {}
            _ => {
                latest.insert(key, (&j.timestamp, j.decision));
            }
        }
    }
    latest.into_iter().map(|(k, (_, d))| (k, d)).collect()
}

/// Reads a line-delimited judgment log. Blank lines are ignored.
pub fn read_judgments<R: BufRead>(input: R) -> Result<Vec<Judgment>, DialectError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let judgment = serde_json::from_str(&line).map_err(|e| DialectError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(judgment);
    }
    Ok(out)
}

pub fn append_judgment<W: Write>(mut out: W, judgment: &Judgment) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(judgment)?)
}
