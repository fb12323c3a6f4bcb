use std::collections::BTreeMap;
use std::io::BufRead;

use super::{nfc, DialectCode, IngestError};

/// Inter-language mapping from dialect article titles to German titles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TitleMap {
    entries: BTreeMap<(DialectCode, String), String>,
}

/// A repeated key; the first occurrence is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TitleConflict {
    pub dialect: DialectCode,
    pub dialect_title: String,
    pub kept: String,
    pub ignored: String,
}

impl TitleConflict {
    pub fn is_conflicting(&self) -> bool {
        self.kept != self.ignored
    }
}

impl TitleMap {
    pub fn from_records<I>(records: I) -> (Self, Vec<TitleConflict>)
    where
        I: IntoIterator<Item = (DialectCode, String, String)>,
    {
        let mut map = Self::default();
        let mut conflicts = Vec::new();
        for (dialect, title, german) in records {
            let key = (dialect, nfc(title.trim()));
            let german = nfc(german.trim());
            match map.entries.get(&key) {
                Some(kept) => conflicts.push(TitleConflict {
                    dialect: key.0.clone(),
                    dialect_title: key.1.clone(),
                    kept: kept.clone(),
                    ignored: german,
                }),
                None => {
                    map.entries.insert(key, german);
                }
            }
        }
        (map, conflicts)
    }

    pub fn lookup(&self, dialect: &DialectCode, title: &str) -> Option<&str> {
        self.entries
            .get(&(dialect.clone(), title.to_owned()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DialectCode, &str, &str)> {
        self.entries
            .iter()
            .map(|((d, t), g)| (d, t.as_str(), g.as_str()))
    }

    /// Adds entries from another map, keeping existing keys.
    pub fn merge(&mut self, other: TitleMap) -> Vec<TitleConflict> {
        let (merged, conflicts) = Self::from_records(
            std::mem::take(&mut self.entries)
                .into_iter()
                .chain(other.entries)
                .map(|((d, t), g)| (d, t, g)),
        );
        *self = merged;
        conflicts
    }
}

/// Reads a `dialect<TAB>dialect_title<TAB>german_title` sidecar file.
pub fn load_title_map<R: BufRead>(source: R) -> Result<(TitleMap, Vec<TitleConflict>), IngestError> {
    let mut records = Vec::new();
    for (index, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [dialect, title, german] = fields[..] else {
            return Err(IngestError::TitleMap {
                line: index + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        };
        let dialect = DialectCode::new(dialect).map_err(|e| IngestError::TitleMap {
            line: index + 1,
            message: e.to_string(),
        })?;
        if title.trim().is_empty() || german.trim().is_empty() {
            return Err(IngestError::TitleMap {
                line: index + 1,
                message: "empty title".to_owned(),
            });
        }
        records.push((dialect, title.to_owned(), german.to_owned()));
    }
    Ok(TitleMap::from_records(records))
}
