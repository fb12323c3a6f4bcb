//! Queries TSV (`qid<TAB>query_text<TAB>dialect`), split TSV
//! (`qid<TAB>split`) and the line-delimited document file.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::ingest::DialectCode;

use super::{Document, Split, SplitAssignment};

#[derive(Debug, thiserror::Error)]
pub enum CollectionIoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn data_lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String), std::io::Error>> {
    input.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() || l.starts_with('#') => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(e)),
    })
}

fn clean(field: &str) -> String {
    field.replace(['\t', '\n', '\r'], " ")
}

/// A query as stored on disk: id, retrieval text and dialect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryLine {
    pub qid: String,
    pub text: String,
    pub dialect: DialectCode,
}

pub fn write_queries<'a, W: Write>(mut out: W, queries: impl IntoIterator<Item = (&'a str, &'a str, &'a DialectCode)>) -> std::io::Result<()> {
    for (qid, text, dialect) in queries {
        writeln!(out, "{qid}\t{}\t{dialect}", clean(text))?;
    }
    Ok(())
}

pub fn read_queries<R: BufRead>(input: R) -> Result<Vec<QueryLine>, CollectionIoError> {
    let mut queries = Vec::new();
    for line in data_lines(input) {
        let (n, line) = line?;
        let fields: Vec<&str> = line.split('\t').collect();
        let [qid, text, dialect] = fields[..] else {
            return Err(CollectionIoError::Parse {
                line: n,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        };
        let dialect = DialectCode::new(dialect).map_err(|e| CollectionIoError::Parse {
            line: n,
            message: e.to_string(),
        })?;
        queries.push(QueryLine {
            qid: qid.to_owned(),
            text: text.to_owned(),
            dialect,
        });
    }
    Ok(queries)
}

pub fn write_split<W: Write>(mut out: W, split: &SplitAssignment) -> std::io::Result<()> {
    for (qid, s) in &split.assignment {
        writeln!(out, "{qid}\t{s}")?;
    }
    Ok(())
}

pub fn read_split<R: BufRead>(input: R) -> Result<SplitAssignment, CollectionIoError> {
    let mut assignment = BTreeMap::new();
    for line in data_lines(input) {
        let (n, line) = line?;
        let parsed = line
            .split_once('\t')
            .ok_or_else(|| "expected qid<TAB>split".to_owned())
            .and_then(|(qid, s)| Ok((qid.to_owned(), s.trim().parse::<Split>()?)));
        let (qid, split) = parsed.map_err(|message| CollectionIoError::Parse { line: n, message })?;
        assignment.insert(qid, split);
    }
    Ok(SplitAssignment { assignment })
}

pub fn write_documents<W: Write>(mut out: W, docs: &[Document]) -> std::io::Result<()> {
    for doc in docs {
        writeln!(out, "{}", serde_json::to_string(doc)?)?;
    }
    Ok(())
}

pub fn read_documents<R: BufRead>(input: R) -> Result<Vec<Document>, CollectionIoError> {
    let mut docs = Vec::new();
    for line in data_lines(input) {
        let (n, line) = line?;
        let doc = serde_json::from_str(&line).map_err(|e| CollectionIoError::Parse {
            line: n,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}
