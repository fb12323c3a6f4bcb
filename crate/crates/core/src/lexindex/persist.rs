//! Line-delimited index file.
//!
//! ```text
//! # optional comment lines
//! wikidir-index<TAB>1
//! bm25<TAB><k1><TAB><b>
//! doc<TAB><doc_id><TAB><space-separated tokens>
//! ...
//! ```
//!
//! Only the token sequences are stored; postings and length statistics are
//! rebuilt on load, so write→read→write is byte-identical.

use std::io::{BufRead, Write};

use super::index::{Bm25Params, InvertedIndex};
use super::tokenize::Token;
use super::IndexError;

const MAGIC: &str = "wikidir-index";
const VERSION: u32 = 1;

impl InvertedIndex {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), IndexError> {
        writeln!(out, "{MAGIC}\t{VERSION}")?;
        writeln!(out, "bm25\t{}\t{}", self.params.k1, self.params.b)?;
        for (id, tokens) in self.doc_ids.iter().zip(&self.doc_tokens) {
            let joined: Vec<&str> = tokens.iter().map(Token::as_str).collect();
            writeln!(out, "doc\t{id}\t{}", joined.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self, IndexError> {
        let mut lines = input
            .lines()
            .enumerate()
            .filter(|(_, l)| !matches!(l, Ok(l) if l.starts_with('#')));
        let format_error = |line: usize, message: &str| IndexError::Format {
            line: line + 1,
            message: message.to_owned(),
        };

        let (n, magic) = lines.next().ok_or_else(|| format_error(0, "empty index file"))?;
        match magic?.split_once('\t') {
            Some((MAGIC, version)) if version == VERSION.to_string() => {}
            Some((MAGIC, version)) => return Err(format_error(n, &format!("unsupported version {version}"))),
            _ => return Err(format_error(n, "missing wikidir-index header")),
        }

        let (n, params) = lines.next().ok_or_else(|| format_error(n + 1, "missing bm25 line"))?;
        let params = params?;
        let fields: Vec<&str> = params.split('\t').collect();
        let params = match fields[..] {
            ["bm25", k1, b] => Bm25Params {
                k1: k1.parse().map_err(|_| format_error(n, "invalid k1"))?,
                b: b.parse().map_err(|_| format_error(n, "invalid b"))?,
            },
            _ => return Err(format_error(n, "expected bm25<TAB>k1<TAB>b")),
        };

        let mut docs = Vec::new();
        for (n, line) in lines {
            let line = line?;
            let mut fields = line.splitn(3, '\t');
            match (fields.next(), fields.next(), fields.next()) {
                (Some("doc"), Some(id), Some(tokens)) if !id.is_empty() => {
                    let tokens = tokens
                        .split(' ')
                        .filter(|t| !t.is_empty())
                        .map(|t| Token::from_folded(t.to_owned()))
                        .collect();
                    docs.push((id.to_owned(), tokens));
                }
                _ => return Err(format_error(n, "expected doc<TAB>id<TAB>tokens")),
            }
        }
        InvertedIndex::from_tokens(docs, params)
    }
}
