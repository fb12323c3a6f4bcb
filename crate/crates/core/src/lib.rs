//! Toolkit for building and evaluating cross-dialect retrieval test collections
//! from Wikipedia-style corpora.
//!
//! The pipeline runs in stages that map onto the modules below:
//!
//! - [`ingest`]: dumps and line-delimited corpora into normalized [`ingest::Article`]s
//! - [`lexindex`]: tokenizer, inverted index, BM25 and the exact-phrase gate
//! - [`collection`]: queries, 200-token documents, graded labels and splits
//! - [`dialect`]: anchor-text variant mining, judgments, kappa and dual assessments
//! - [`runtime`]: first-stage retrieval, plugin protocol, sliding-window reranking
//! - [`eval`]: nDCG@k, TREC interchange formats and collection statistics

pub mod collection;
pub mod dialect;
pub mod eval;
pub mod ingest;
pub mod lexindex;
pub mod runtime;


pub use collection::{Document, Qrels, QrelsSide, Query, Split, SplitAssignment};
pub use dialect::{CandidateMention, Decision, DialectDictionary, Judgment, KappaReport};
pub use eval::EvalResult;
pub use ingest::{AnchorLink, Article, DialectCode, RawPage, TitleMap};
pub use lexindex::{Bm25Params, InvertedIndex, ScoredDoc, Token};
pub use runtime::RunList;
