//! Ingestion of Wikipedia-style sources into normalized articles.
//!
//! Two input shapes are supported: MediaWiki XML exports (optionally bz2
//! compressed) and the line-delimited corpus record format that is also the
//! normalized output of this module. All text is NFC-normalized on the way in.

mod dump;
mod online;
mod records;
mod redirects;
mod titles;
mod wikitext;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

pub use dump::{open_dump, parse_dump};
pub use online::{FetchMode, RedirectFetcher, RetryPolicy};
pub use records::{article_order, articles_from_pages, read_corpus, write_corpus, CorpusRecord, LinkRecord};
pub use redirects::{redirect_map, resolve_redirects, RedirectIssue, RedirectIssueKind, Resolution};
pub use titles::{load_title_map, TitleConflict, TitleMap};
pub use wikitext::{strip_wikitext, StripIssue, Stripped};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("invalid dialect code {0:?}")]
    DialectCode(String),
    #[error("corpus record at line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("title map line {line}: {message}")]
    TitleMap { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Short wiki code identifying a dialect edition. `de` is standard German.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DialectCode(String);

impl DialectCode {
    pub const STANDARD: &'static str = "de";

    pub fn new(code: &str) -> Result<Self, IngestError> {
        let code = code.trim();
        let valid = !code.is_empty()
            && code
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-');
        if valid {
            Ok(Self(code.to_owned()))
        } else {
            Err(IngestError::DialectCode(code.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_standard(&self) -> bool {
        self.0 == Self::STANDARD
    }
}

impl fmt::Display for DialectCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for DialectCode {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl TryFrom<String> for DialectCode {
    type Error = IngestError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(&value)
    }
}

impl From<DialectCode> for String {
    fn from(code: DialectCode) -> Self {
        code.0
    }
}

/// A page as it appears in an export, before wikitext is stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPage {
    pub page_id: u64,
    pub canonical_title: String,
    pub display_title: String,
    pub wikitext: String,
    pub redirect_target: Option<String>,
    pub dialect: DialectCode,
    pub subdialect_tag: Option<String>,
}

impl RawPage {
    pub fn is_redirect(&self) -> bool {
        self.redirect_target.is_some()
    }
}

/// An outgoing wiki link. The owning [`Article`] is the link source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorLink {
    /// Link target as written, before redirect resolution.
    pub target_title: String,
    pub anchor_text: String,
    /// Up to 60 characters of plain text on either side of the anchor.
    pub context_snippet: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Article {
    pub id: String,
    pub dialect: DialectCode,
    pub display_title: String,
    pub canonical_title: String,
    pub german_title: Option<String>,
    pub plain_text: String,
    pub links: Vec<AnchorLink>,
    pub subdialect_tag: Option<String>,
}

/// Article ids combine the dialect code and the page id.
pub fn article_id(dialect: &DialectCode, page_id: u64) -> String {
    format!("{dialect}-{page_id}")
}

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// Plain-text log of recoverable problems met during ingestion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub lines: Vec<String>,
}

impl IngestReport {
    pub fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}
