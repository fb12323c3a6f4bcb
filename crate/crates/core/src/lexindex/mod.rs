//! Tokenization, inverted index, Lucene-style BM25 and the exact-phrase gate.

mod index;
mod persist;
mod tokenize;

pub use index::{build_index, phrasal_match, Bm25Params, InvertedIndex, Posting, ScoredDoc};
pub use tokenize::{contains_phrase, token_spans, tokenize, Token};

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate document id {0:?}")]
    DuplicateDoc(String),
    #[error("unknown document id {0:?}")]
    UnknownDoc(String),
    #[error("phrase {0:?} contains no tokens")]
    EmptyPhrase(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("index file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
