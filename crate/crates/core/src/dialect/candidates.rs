use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ingest::{nfc, resolve_redirects, Article, DialectCode};

use super::{fold, tsv_field, DialectError};

/// Redirect edges per dialect wiki (source title → target title).
pub type RedirectTable = BTreeMap<DialectCode, BTreeMap<String, String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateMention {
    pub candidate_id: String,
    pub dialect: DialectCode,
    /// Redirect-resolved title of the linked dialect article.
    pub entity_title: String,
    pub mention: String,
    pub source_doc: String,
    pub context: String,
}

/// Stable id derived from what the candidate asserts, not from where it was
/// first seen, so re-mining an extended corpus keeps existing ids.
pub fn candidate_id(dialect: &DialectCode, entity_title: &str, mention: &str) -> String {
    let digest = Sha256::digest(format!("{dialect}\t{entity_title}\t{mention}").as_bytes());
    let hex: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
    format!("c{hex}")
}

/// One candidate per distinct (dialect, entity, anchor text). Link targets are
/// resolved through the dialect's redirects; links to titles without an
/// article and anchors equal to the entity title (ignoring case) are dropped.
/// The first occurrence in corpus order supplies source and context.
/// Output is grouped by entity: sorted by dialect, entity title, mention.
pub fn extract_candidates(corpus: &[Article], redirects: &RedirectTable) -> Vec<CandidateMention> {
    let titles: BTreeSet<(&DialectCode, &str)> = corpus
        .iter()
        .map(|a| (&a.dialect, a.canonical_title.as_str()))
        .collect();
    let empty = BTreeMap::new();
    let mut resolved_per_dialect: BTreeMap<&DialectCode, BTreeMap<String, String>> = BTreeMap::new();
    for article in corpus {
        let edges = redirects.get(&article.dialect).unwrap_or(&empty);
        let targets = article.links.iter().map(|l| l.target_title.as_str());
        let resolution = resolve_redirects(targets, edges);
        resolved_per_dialect
            .entry(&article.dialect)
            .or_default()
            .extend(resolution.resolved);
    }

    let mut seen: BTreeMap<(DialectCode, String, String), CandidateMention> = BTreeMap::new();
    for article in corpus {
        let resolved = &resolved_per_dialect[&article.dialect];
        for link in &article.links {
            let mention = nfc(link.anchor_text.trim());
            let entity = &resolved[&link.target_title];
            if mention.is_empty() || !titles.contains(&(&article.dialect, entity.as_str())) || fold(&mention) == fold(entity) {
                continue;
            }
            let key = (article.dialect.clone(), entity.clone(), mention.clone());
            seen.entry(key).or_insert_with(|| CandidateMention {
                candidate_id: candidate_id(&article.dialect, entity, &mention),
                dialect: article.dialect.clone(),
                entity_title: entity.clone(),
                mention,
                source_doc: article.id.clone(),
                context: link.context_snippet.clone(),
            });
        }
    }
    seen.into_values().collect()
}

pub fn write_candidates<W: Write>(mut out: W, candidates: &[CandidateMention]) -> std::io::Result<()> {
    for c in candidates {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            c.candidate_id,
            c.dialect,
            tsv_field(&c.entity_title),
            tsv_field(&c.mention),
            c.source_doc,
            tsv_field(&c.context)
        )?;
    }
    Ok(())
}

pub fn read_candidates<R: BufRead>(input: R) -> Result<Vec<CandidateMention>, DialectError> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| DialectError::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, dialect, entity, mention, source, context] = fields[..] else {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        };
        if !ids.insert(id.to_owned()) {
            return Err(err(format!("duplicate candidate id {id}")));
        }
        out.push(CandidateMention {
            candidate_id: id.to_owned(),
            dialect: DialectCode::new(dialect).map_err(|e| err(e.to_string()))?,
            entity_title: entity.to_owned(),
            mention: mention.to_owned(),
            source_doc: source.to_owned(),
            context: context.to_owned(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::AnchorLink;

    fn article(id: &str, title: &str, links: &[(&str, &str)]) -> Article {
        Article {
            id: id.into(),
            dialect: DialectCode::new("bar").unwrap(),
            display_title: title.into(),
            canonical_title: title.into(),
            german_title: None,
            plain_text: String::new(),
            links: links
                .iter()
                .map(|(t, a)| AnchorLink {
                    target_title: t.to_string(),
                    anchor_text: a.to_string(),
                    context_snippet: format!("… {a} …"),
                })
                .collect(),
            subdialect_tag: None,
        }
    }

    fn redirects(edges: &[(&str, &str)]) -> RedirectTable {
        let map = edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        BTreeMap::from([(DialectCode::new("bar").unwrap(), map)])
    }

    #[test]
    fn anchor_becomes_candidate() {
        let corpus = [
            article("bar-1", "Minga", &[]),
            article("bar-2", "Bayern", &[("Minga", "Münch'n"), ("Minga", "minga")]),
        ];
        let found = extract_candidates(&corpus, &RedirectTable::new());
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].entity_title, "Minga");
        assert_eq!(found[0].mention, "Münch'n");
        assert_eq!(found[0].source_doc, "bar-2");
    }

    #[test]
    fn redirects_resolve_to_entity() {
        let corpus = [
            article("bar-1", "Minga", &[]),
            article("bar-2", "Bayern", &[("Minkn", "Minkn"), ("Nirgends", "Nix")]),
        ];
        let found = extract_candidates(&corpus, &redirects(&[("Minkn", "Minga")]));
        assert_eq!(found.len(), 1);
        assert_eq!((found[0].entity_title.as_str(), found[0].mention.as_str()), ("Minga", "Minkn"));
    }

    #[test]
    fn repeated_mentions_collapse() {
        let corpus = [
            article("bar-1", "Minga", &[]),
            article("bar-2", "A", &[("Minga", "Minkcha")]),
            article("bar-3", "B", &[("Minga", "Minkcha")]),
        ];
        let found = extract_candidates(&corpus, &RedirectTable::new());
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].source_doc, "bar-2");
    }

    #[test]
    fn tsv_round_trip() {
        let corpus = [article("bar-1", "Minga", &[]), article("bar-2", "A", &[("Minga", "Minkcha")])];
        let found = extract_candidates(&corpus, &RedirectTable::new());
        let mut out = Vec::new();
        write_candidates(&mut out, &found).unwrap();
        assert_eq!(read_candidates(out.as_slice()).unwrap(), found);
        assert!(read_candidates("a\tb\n".as_bytes()).is_err());
    }
}
