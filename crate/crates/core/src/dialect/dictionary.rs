use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::{Article, DialectCode};

use super::judgments::{effective_decisions, Decision, Judgment};
use super::{fold, tsv_field, CandidateMention, DialectError};

/// How effective decisions of several annotators combine into inclusion.
/// Skips abstain under both policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// At least one accept.
    AnyAccept,
    /// Strictly more accepts than rejects.
    Majority,
}

impl Policy {
    /// Any-accept for a single annotator, majority once several are involved.
    pub fn default_for(annotators: usize) -> Self {
        if annotators >= 2 {
            Policy::Majority
        } else {
            Policy::AnyAccept
        }
    }

    fn admits(self, accepts: usize, rejects: usize) -> bool {
        match self {
            Policy::AnyAccept => accepts > 0,
            Policy::Majority => accepts > rejects,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::AnyAccept => "any-accept",
            Policy::Majority => "majority",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any-accept" => Ok(Policy::AnyAccept),
            "majority" => Ok(Policy::Majority),
            other => Err(format!("unknown policy {other:?}; expected any-accept or majority")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub german_title: Option<String>,
    /// Accepted variants, unique ignoring case, sorted.
    pub variants: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DialectDictionary {
    pub entries: BTreeMap<(DialectCode, String), DictionaryEntry>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    dialect: DialectCode,
    entity_title: String,
    german_title: Option<String>,
    variants: Vec<String>,
}

impl DialectDictionary {
    pub fn variants(&self, dialect: &DialectCode, entity_title: &str) -> &[String] {
        self.entries
            .get(&(dialect.clone(), entity_title.to_owned()))
            .map_or(&[], |e| e.variants.as_slice())
    }

    pub fn entity_count(&self) -> usize {
        self.entries.len()
    }

    pub fn variant_count(&self) -> usize {
        self.entries.values().map(|e| e.variants.len()).sum()
    }

    /// Fills German titles from articles whose canonical title is an entry's entity.
    pub fn attach_german_titles(&mut self, corpus: &[Article]) {
        let german: BTreeMap<(&DialectCode, &str), &String> = corpus
            .iter()
            .filter_map(|a| Some(((&a.dialect, a.canonical_title.as_str()), a.german_title.as_ref()?)))
            .collect();
        for ((dialect, entity), entry) in &mut self.entries {
            if let Some(g) = german.get(&(dialect, entity.as_str())) {
                entry.german_title = Some((*g).clone());
            }
        }
    }

    /// `dialect<TAB>entity_title<TAB>german_title<TAB>v1|v2|...`; a missing
    /// German title is written as an empty field.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for ((dialect, entity), entry) in &self.entries {
            let variants: Vec<String> = entry.variants.iter().map(|v| tsv_field(v).replace('|', " ")).collect();
            writeln!(
                out,
                "{dialect}\t{}\t{}\t{}",
                tsv_field(entity),
                tsv_field(entry.german_title.as_deref().unwrap_or("")),
                variants.join("|")
            )?;
        }
        Ok(())
    }

    /// Structured export: a JSON array of entries in key order.
    pub fn to_json(&self) -> serde_json::Value {
        let records: Vec<EntryRecord> = self
            .entries
            .iter()
            .map(|((dialect, entity), e)| EntryRecord {
                dialect: dialect.clone(),
                entity_title: entity.clone(),
                german_title: e.german_title.clone(),
                variants: e.variants.clone(),
            })
            .collect();
        serde_json::to_value(records).expect("dictionary serializes")
    }
}

pub fn read_dictionary_tsv<R: BufRead>(input: R) -> Result<DialectDictionary, DialectError> {
    let mut dict = DialectDictionary::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| DialectError::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [dialect, entity, german, variants] = fields[..] else {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        };
        let dialect = DialectCode::new(dialect).map_err(|e| err(e.to_string()))?;
        let entry = DictionaryEntry {
            german_title: (!german.is_empty()).then(|| german.to_owned()),
            variants: variants.split('|').filter(|v| !v.is_empty()).map(str::to_owned).collect(),
        };
        dict.entries.insert((dialect, entity.to_owned()), entry);
    }
    Ok(dict)
}

/// Builds the dictionary from candidates and the judgment log. A variant is
/// kept when the policy admits the effective decisions on its candidate.
/// Entities left without variants are omitted.
pub fn apply_judgments(candidates: &[CandidateMention], judgments: &[Judgment], policy: Policy) -> Result<DialectDictionary, DialectError> {
    let by_id: BTreeMap<&str, &CandidateMention> = candidates.iter().map(|c| (c.candidate_id.as_str(), c)).collect();
    let unknown: BTreeSet<String> = judgments
        .iter()
        .filter(|j| !by_id.contains_key(j.candidate_id.as_str()))
        .map(|j| j.candidate_id.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(DialectError::UnknownCandidates(unknown));
    }

    let mut tallies: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for ((_, candidate), decision) in effective_decisions(judgments) {
        let tally = tallies.entry(candidate).or_default();
        match decision {
            Decision::Accept => tally.0 += 1,
            Decision::Reject => tally.1 += 1,
            Decision::Skip => {}
        }
    }

    let mut folded: BTreeMap<(DialectCode, String), BTreeMap<String, String>> = BTreeMap::new();
    for candidate in candidates {
        let Some(&(accepts, rejects)) = tallies.get(candidate.candidate_id.as_str()) else {
            continue;
        };
        if !policy.admits(accepts, rejects) || fold(&candidate.mention) == fold(&candidate.entity_title) {
            continue;
        }
        folded
            .entry((candidate.dialect.clone(), candidate.entity_title.clone()))
            .or_default()
            .entry(fold(&candidate.mention))
            .or_insert_with(|| candidate.mention.clone());
    }

    let entries = folded
        .into_iter()
        .map(|(key, variants)| {
            let entry = DictionaryEntry {
                german_title: None,
                variants: variants.into_values().collect(),
            };
            (key, entry)
        })
        .collect();
    Ok(DialectDictionary { entries })
}
