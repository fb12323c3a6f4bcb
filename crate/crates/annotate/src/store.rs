//! Candidate store and append-only judgment log.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;
use wikidir::dialect::{
    append_judgment, apply_judgments, cohen_kappa, effective_decisions, read_judgments, DialectError, DialectDictionary, KappaReport, Policy,
};
use wikidir::{CandidateMention, Decision, DialectCode, Judgment};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown candidate {0:?}")]
    UnknownCandidate(String),
    #[error("unknown dialect {0:?}")]
    UnknownDialect(String),
    #[error("annotator id must not be empty")]
    EmptyAnnotator,
    #[error("{0}")]
    NoOverlap(String),
    #[error("judgment log {path}: {source}")]
    Log { path: PathBuf, source: DialectError },
    #[error(transparent)]
    Dialect(#[from] DialectError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A served candidate with the entity context annotators need.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateView {
    #[serde(flatten)]
    pub candidate: CandidateMention,
    pub german_title: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ack {
    pub candidate_id: String,
    pub decision: Decision,
    /// Candidates this annotator has judged.
    pub judged: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DialectProgress {
    pub total: usize,
    /// Judged candidates per annotator.
    pub judged: BTreeMap<String, usize>,
}

pub struct Store {
    /// Entity-grouped serving order.
    candidates: Vec<CandidateMention>,
    position: BTreeMap<String, usize>,
    german_titles: BTreeMap<(DialectCode, String), String>,
    log: Vec<Judgment>,
    log_path: PathBuf,
    log_file: File,
    /// Index of the last candidate served, per (annotator, dialect filter).
    cursors: BTreeMap<(String, Option<DialectCode>), usize>,
}

impl Store {
    /// Opens (or creates) the judgment log at `log_path` and compacts it.
    pub fn open(mut candidates: Vec<CandidateMention>, log_path: &Path) -> Result<Self, StoreError> {
        candidates.sort_by(|a, b| {
            (&a.dialect, &a.entity_title, &a.mention, &a.candidate_id).cmp(&(&b.dialect, &b.entity_title, &b.mention, &b.candidate_id))
        });
        let position = candidates.iter().enumerate().map(|(i, c)| (c.candidate_id.clone(), i)).collect();
        let log = if log_path.exists() {
            read_judgments(BufReader::new(File::open(log_path)?)).map_err(|source| StoreError::Log {
                path: log_path.to_owned(),
                source,
            })?
        } else {
            Vec::new()
        };
        let log_file = OpenOptions::new().create(true).append(true).open(log_path)?;
        let mut store = Self {
            candidates,
            position,
            german_titles: BTreeMap::new(),
            log,
            log_path: log_path.to_owned(),
            log_file,
            cursors: BTreeMap::new(),
        };
        store.compact()?;
        Ok(store)
    }

    pub fn with_german_titles(mut self, titles: BTreeMap<(DialectCode, String), String>) -> Self {
        self.german_titles = titles;
        self
    }

    pub fn log(&self) -> &[Judgment] {
        &self.log
    }

    pub fn candidates(&self) -> &[CandidateMention] {
        &self.candidates
    }

    fn judged_by(&self, annotator: &str) -> BTreeSet<&str> {
        self.log
            .iter()
            .filter(|j| j.annotator_id == annotator)
            .map(|j| j.candidate_id.as_str())
            .collect()
    }

    /// Up to `n` candidates the annotator has not judged, continuing after the
    /// last one served and wrapping to the start. With `review`, judged
    /// candidates are served as well.
    pub fn next_batch(&mut self, annotator: &str, dialect: Option<&str>, n: usize, review: bool) -> Result<Vec<CandidateView>, StoreError> {
        if annotator.trim().is_empty() {
            return Err(StoreError::EmptyAnnotator);
        }
        let dialect = match dialect {
            None => None,
            Some(code) => {
                let known = self.candidates.iter().any(|c| c.dialect.as_str() == code);
                let parsed = DialectCode::new(code).ok().filter(|_| known);
                Some(parsed.ok_or_else(|| StoreError::UnknownDialect(code.to_owned()))?)
            }
        };
        let judged = if review { BTreeSet::new() } else { self.judged_by(annotator) };
        let key = (annotator.to_owned(), dialect.clone());
        let start = self.cursors.get(&key).map_or(0, |c| c + 1);
        let len = self.candidates.len();
        let picked: Vec<usize> = (0..len)
            .map(|offset| (start + offset) % len)
            .filter(|&i| {
                let c = &self.candidates[i];
                dialect.as_ref().is_none_or(|d| &c.dialect == d) && !judged.contains(c.candidate_id.as_str())
            })
            .take(n)
            .collect();
        if let Some(&last) = picked.last() {
            self.cursors.insert(key, last);
        }
        Ok(picked.into_iter().map(|i| self.view(&self.candidates[i])).collect())
    }

    fn view(&self, c: &CandidateMention) -> CandidateView {
        CandidateView {
            candidate: c.clone(),
            german_title: self.german_titles.get(&(c.dialect.clone(), c.entity_title.clone())).cloned(),
        }
    }

    /// Appends and syncs the judgment before acknowledging it.
    pub fn submit(&mut self, annotator: &str, candidate_id: &str, decision: Decision, timestamp: DateTime<Utc>) -> Result<Ack, StoreError> {
        if annotator.trim().is_empty() {
            return Err(StoreError::EmptyAnnotator);
        }
        if !self.position.contains_key(candidate_id) {
            return Err(StoreError::UnknownCandidate(candidate_id.to_owned()));
        }
        let judgment = Judgment {
            annotator_id: annotator.to_owned(),
            candidate_id: candidate_id.to_owned(),
            decision,
            timestamp,
        };
        let mut line = Vec::new();
        append_judgment(&mut line, &judgment)?;
        self.log_file.write_all(&line)?;
        self.log_file.sync_data()?;
        self.log.push(judgment);
        Ok(Ack {
            candidate_id: candidate_id.to_owned(),
            decision,
            judged: self.judged_by(annotator).len(),
            total: self.candidates.len(),
        })
    }

    pub fn agreement(&self, a: &str, b: &str) -> Result<KappaReport, StoreError> {
        cohen_kappa(&self.log, a, b).map_err(|e| match e {
            DialectError::NoOverlap { .. } => StoreError::NoOverlap(e.to_string()),
            other => other.into(),
        })
    }

    /// The dictionary the log currently implies. Without a policy, the default
    /// for the number of annotators in the log applies.
    pub fn dictionary(&self, policy: Option<Policy>) -> Result<(DialectDictionary, Policy), StoreError> {
        let annotators: BTreeSet<&str> = self.log.iter().map(|j| j.annotator_id.as_str()).collect();
        let policy = policy.unwrap_or_else(|| Policy::default_for(annotators.len()));
        let mut dict = apply_judgments(&self.candidates, &self.log, policy)?;
        for ((dialect, entity), entry) in &mut dict.entries {
            entry.german_title = self.german_titles.get(&(dialect.clone(), entity.clone())).cloned();
        }
        Ok((dict, policy))
    }

    pub fn progress(&self) -> BTreeMap<DialectCode, DialectProgress> {
        let mut out: BTreeMap<DialectCode, DialectProgress> = BTreeMap::new();
        for c in &self.candidates {
            out.entry(c.dialect.clone())
                .or_insert_with(|| DialectProgress {
                    total: 0,
                    judged: BTreeMap::new(),
                })
                .total += 1;
        }
        for (annotator, candidate) in effective_decisions(&self.log).keys() {
            if let Some(&i) = self.position.get(*candidate) {
                let entry = out.get_mut(&self.candidates[i].dialect).expect("dialect counted above");
                *entry.judged.entry((*annotator).to_owned()).or_default() += 1;
            }
        }
        out
    }

    /// Rewrites the log keeping only effective judgments, via a synced
    /// temporary file renamed over the original.
    pub fn compact(&mut self) -> Result<(), StoreError> {
        let effective = effective_decisions(&self.log);
        if effective.len() == self.log.len() {
            return Ok(());
        }
        let mut keep: BTreeMap<(String, String), Judgment> = BTreeMap::new();
        for j in &self.log {
            if effective.get(&(j.annotator_id.as_str(), j.candidate_id.as_str())) == Some(&j.decision) {
                let key = (j.annotator_id.clone(), j.candidate_id.clone());
                let newer = keep.get(&key).is_none_or(|k| j.timestamp >= k.timestamp);
                if newer {
                    keep.insert(key, j.clone());
                }
            }
        }
        let mut compacted: Vec<Judgment> = keep.into_values().collect();
        compacted.sort_by_key(|j| j.timestamp);
        let tmp = self.log_path.with_extension("compact.tmp");
        {
            let mut file = File::create(&tmp)?;
            for j in &compacted {
                append_judgment(&mut file, j)?;
            }
            file.sync_all()?;
        }
        fs::rename(&tmp, &self.log_path)?;
        self.log_file = OpenOptions::new().append(true).open(&self.log_path)?;
        self.log = compacted;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use wikidir::dialect::candidate_id;

    fn candidates() -> Vec<CandidateMention> {
        let mut out = Vec::new();
        for (dialect, entity, mention) in [
            ("bar", "Minga", "Münch'n"),
            ("bar", "Minga", "Minkn"),
            ("als", "Schtadt", "Schtatt"),
            ("als", "Schtadt", "Schtädt"),
            ("bar", "Brezn", "Brezl"),
        ] {
            let d = DialectCode::new(dialect).unwrap();
            out.push(CandidateMention {
                candidate_id: candidate_id(&d, entity, mention),
                dialect: d,
                entity_title: entity.into(),
                mention: mention.into(),
                source_doc: format!("{dialect}-1"),
                context: String::new(),
            });
        }
        out
    }

    fn at(second: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, second).unwrap()
    }

    #[test]
    fn batches_are_entity_grouped_and_wrap() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(candidates(), &dir.path().join("log.jsonl")).unwrap();
        let first: Vec<String> = store.next_batch("anna", None, 3, false).unwrap().into_iter().map(|v| v.candidate.mention).collect();
        assert_eq!(first, ["Schtatt", "Schtädt", "Brezl"]);
        let second: Vec<String> = store.next_batch("anna", None, 3, false).unwrap().into_iter().map(|v| v.candidate.mention).collect();
        assert_eq!(second, ["Minkn", "Münch'n", "Schtatt"]);
    }

    #[test]
    fn judged_candidates_are_not_served() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(candidates(), &dir.path().join("log.jsonl")).unwrap();
        for c in candidates() {
            store.submit("anna", &c.candidate_id, Decision::Accept, at(0)).unwrap();
        }
        assert!(store.next_batch("anna", None, 50, false).unwrap().is_empty());
        assert_eq!(store.next_batch("beni", None, 50, false).unwrap().len(), 5);
        assert_eq!(store.next_batch("anna", None, 50, true).unwrap().len(), 5);
        assert!(matches!(store.next_batch("anna", Some("xx"), 5, false), Err(StoreError::UnknownDialect(_))));
    }

    #[test]
    fn compaction_keeps_effective_decisions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let id = candidates()[0].candidate_id.clone();
        {
            let mut store = Store::open(candidates(), &path).unwrap();
            store.submit("anna", &id, Decision::Accept, at(1)).unwrap();
            store.submit("anna", &id, Decision::Reject, at(2)).unwrap();
            assert_eq!(store.log().len(), 2);
        }
        let store = Store::open(candidates(), &path).unwrap();
        assert_eq!(store.log().len(), 1);
        assert_eq!(store.log()[0].decision, Decision::Reject);
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);
    }
}
