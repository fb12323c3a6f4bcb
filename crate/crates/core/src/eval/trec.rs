//! Qrels `qid 0 docid label` and runs `qid Q0 docid rank score tag`,
//! whitespace separated. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::collection::{Qrels, QrelsSide};
use crate::runtime::{RunEntry, RunList};

#[derive(Debug, thiserror::Error)]
pub enum TrecError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String), TrecError>> {
    input.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() || l.starts_with('#') => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(e.into())),
    })
}

pub fn read_qrels<R: BufRead>(input: R, side: QrelsSide) -> Result<Qrels, TrecError> {
    let mut qrels = Qrels::new(side);
    for line in lines(input) {
        let (n, line) = line?;
        let err = |message: String| TrecError::Parse { line: n, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [qid, _iteration, doc, label] = fields[..] else {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        };
        let label: u8 = label.parse().map_err(|_| err(format!("bad label {label:?}")))?;
        let previous = qrels.labels.entry(qid.to_owned()).or_default().insert(doc.to_owned(), label);
        if previous.is_some() {
            return Err(err(format!("duplicate judgment for {qid} {doc}")));
        }
    }
    Ok(qrels)
}

pub fn write_qrels<W: Write>(mut out: W, qrels: &Qrels) -> std::io::Result<()> {
    for (qid, docs) in &qrels.labels {
        for (doc, label) in docs {
            writeln!(out, "{qid} 0 {doc} {label}")?;
        }
    }
    Ok(())
}

/// Ranks must run 1..=n per query; the first tag seen names the run.
pub fn read_run<R: BufRead>(input: R) -> Result<RunList, TrecError> {
    let mut tag = None;
    let mut by_query: BTreeMap<String, Vec<(usize, RunEntry)>> = BTreeMap::new();
    for line in lines(input) {
        let (n, line) = line?;
        let err = |message: String| TrecError::Parse { line: n, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [qid, _q0, doc, rank, score, run_tag] = fields[..] else {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        };
        let rank: usize = rank
            .parse()
            .ok()
            .filter(|r| *r >= 1)
            .ok_or_else(|| err(format!("bad rank {rank:?}")))?;
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| err(format!("bad score {score:?}")))?;
        tag.get_or_insert_with(|| run_tag.to_owned());
        by_query.entry(qid.to_owned()).or_default().push((
            n,
            RunEntry {
                doc_id: doc.to_owned(),
                score,
                rank,
            },
        ));
    }
    let mut run = RunList::new(tag.unwrap_or_default());
    for (qid, mut entries) in by_query {
        entries.sort_by_key(|(_, e)| e.rank);
        for (i, (line, entry)) in entries.iter().enumerate() {
            if entry.rank != i + 1 {
                return Err(TrecError::Parse {
                    line: *line,
                    message: format!("ranks for {qid} are not 1..n (rank {} at position {})", entry.rank, i + 1),
                });
            }
        }
        run.entries.insert(qid, entries.into_iter().map(|(_, e)| e).collect());
    }
    Ok(run)
}

pub fn write_run<W: Write>(mut out: W, run: &RunList) -> std::io::Result<()> {
    let tag = if run.tag.is_empty() { "run" } else { run.tag.as_str() };
    for (qid, entries) in &run.entries {
        for e in entries {
            writeln!(out, "{qid} Q0 {} {} {} {tag}", e.doc_id, e.rank, e.score)?;
        }
    }
    Ok(())
}
