//! Dialect-variant mining from anchor links, human judgments, Cohen's kappa,
//! the variant dictionary and the dual (title-only / title+variants)
//! assessments of the analysis split.

mod analysis;
mod candidates;
mod dictionary;
mod judgments;
mod kappa;

use std::collections::BTreeSet;

pub use analysis::{build_analysis_split, exact_match_rate, synthesize_dual_qrels, DualMode, ExactMatchStats};
pub use candidates::{candidate_id, extract_candidates, read_candidates, write_candidates, CandidateMention, RedirectTable};
pub use dictionary::{apply_judgments, read_dictionary_tsv, DialectDictionary, DictionaryEntry, Policy};
pub use judgments::{append_judgment, effective_decisions, read_judgments, Decision, Judgment};
pub use kappa::{cohen_kappa, KappaReport};

#[derive(Debug, thiserror::Error)]
pub enum DialectError {
    #[error("judgments reference unknown candidates: {}", .0.iter().cloned().collect::<Vec<_>>().join(", "))]
    UnknownCandidates(BTreeSet<String>),
    #[error("annotators {a:?} and {b:?} share no non-skip judgments")]
    NoOverlap { a: String, b: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Case-insensitive comparison key used for identity filtering and dedup.
pub(crate) fn fold(text: &str) -> String {
    text.trim().to_lowercase()
}

pub(crate) fn tsv_field(text: &str) -> String {
    text.replace(['\t', '\n', '\r'], " ")
}
