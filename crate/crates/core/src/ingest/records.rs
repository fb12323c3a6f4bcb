use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::wikitext::strip_wikitext;
use super::{article_id, nfc, AnchorLink, Article, DialectCode, IngestError, IngestReport, RawPage, TitleMap};

/// One line of the line-delimited corpus format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub dialect: DialectCode,
    pub canonical_title: String,
    pub display_title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub german_title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subdialect_tag: Option<String>,
    pub text: String,
    #[serde(default)]
    pub links: Vec<LinkRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub target: String,
    pub anchor: String,
    #[serde(default)]
    pub context: String,
}

impl From<&Article> for CorpusRecord {
    fn from(a: &Article) -> Self {
        Self {
            id: a.id.clone(),
            dialect: a.dialect.clone(),
            canonical_title: a.canonical_title.clone(),
            display_title: a.display_title.clone(),
            german_title: a.german_title.clone(),
            subdialect_tag: a.subdialect_tag.clone(),
            text: a.plain_text.clone(),
            links: a
                .links
                .iter()
                .map(|l| LinkRecord {
                    target: l.target_title.clone(),
                    anchor: l.anchor_text.clone(),
                    context: l.context_snippet.clone(),
                })
                .collect(),
        }
    }
}

impl CorpusRecord {
    fn into_article(self) -> Article {
        let opt = |s: Option<String>| s.map(|s| nfc(&s)).filter(|s| !s.trim().is_empty());
        let display = nfc(&self.display_title);
        let canonical = nfc(&self.canonical_title);
        Article {
            id: self.id,
            dialect: self.dialect,
            display_title: if display.trim().is_empty() { canonical.clone() } else { display },
            canonical_title: canonical,
            german_title: opt(self.german_title),
            plain_text: nfc(&self.text),
            links: self
                .links
                .into_iter()
                .filter(|l| !l.anchor.trim().is_empty() && !l.target.trim().is_empty())
                .map(|l| AnchorLink {
                    target_title: nfc(&l.target),
                    anchor_text: nfc(&l.anchor),
                    context_snippet: nfc(&l.context),
                })
                .collect(),
            subdialect_tag: opt(self.subdialect_tag),
        }
    }
}

/// Reads a line-delimited corpus. Blank lines and `#` comment lines are skipped.
pub fn read_corpus<R: BufRead>(input: R) -> Result<Vec<Article>, IngestError> {
    let mut articles = Vec::new();
    for (index, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(&line).map_err(|e| IngestError::Record {
            line: index + 1,
            message: e.to_string(),
        })?;
        if record.id.trim().is_empty() || record.id.contains(char::is_whitespace) {
            return Err(IngestError::Record {
                line: index + 1,
                message: format!("invalid article id {:?}", record.id),
            });
        }
        articles.push(record.into_article());
    }
    Ok(articles)
}

pub fn write_corpus<W: Write>(mut out: W, articles: &[Article]) -> Result<(), IngestError> {
    for article in articles {
        let line = serde_json::to_string(&CorpusRecord::from(article)).map_err(std::io::Error::from)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Sort key giving page-id order within a dialect for ids of the form `<dialect>-<page_id>`.
pub fn article_order(a: &Article) -> (DialectCode, u64, String) {
    let page = a
        .id
        .rsplit_once('-')
        .and_then(|(_, n)| n.parse().ok())
        .unwrap_or(u64::MAX);
    (a.dialect.clone(), page, a.id.clone())
}

/// Turns parsed pages into articles. Redirect pages are skipped; stripping
/// problems and link-less inter-language lookups are written to `report`.
pub fn articles_from_pages(pages: &[RawPage], titles: &TitleMap, report: &mut IngestReport) -> Vec<Article> {
    let mut articles = Vec::new();
    for page in pages.iter().filter(|p| !p.is_redirect()) {
        let stripped = strip_wikitext(&page.wikitext);
        for issue in &stripped.issues {
            report.push(format!(
                "{}:{} {:?}: {} at byte {}",
                page.dialect, page.page_id, page.canonical_title, issue.message, issue.offset
            ));
        }
        let display_title = stripped
            .display_title
            .clone()
            .unwrap_or_else(|| page.display_title.clone());
        let german_title = if page.dialect.is_standard() {
            Some(page.canonical_title.clone())
        } else {
            titles
                .lookup(&page.dialect, &page.canonical_title)
                .or_else(|| titles.lookup(&page.dialect, &display_title))
                .map(str::to_owned)
                .or_else(|| {
                    stripped
                        .langlinks
                        .iter()
                        .find(|(code, _)| code == DialectCode::STANDARD)
                        .map(|(_, title)| title.clone())
                })
        };
        articles.push(Article {
            id: article_id(&page.dialect, page.page_id),
            dialect: page.dialect.clone(),
            display_title,
            canonical_title: page.canonical_title.clone(),
            german_title,
            plain_text: stripped.plain_text,
            links: stripped.links,
            subdialect_tag: page.subdialect_tag.clone(),
        });
    }
    articles
}
