//! Per-dialect collection statistics as `dialect<TAB>statistic<TAB>value<TAB>n`
//! rows, where `n` is the count the value was computed over.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::collection::{Qrels, Split, SplitAssignment};
use crate::dialect::{CandidateMention, DialectDictionary, ExactMatchStats};
use crate::ingest::{Article, DialectCode};

#[derive(Debug, Clone, Default)]
pub struct StatsInputs<'a> {
    pub corpus: &'a [Article],
    /// qid → dialect for every known query.
    pub query_dialects: BTreeMap<String, DialectCode>,
    pub split: Option<&'a SplitAssignment>,
    /// Named qrels sets, e.g. `monolingual`, `analysis_without`.
    pub qrels: Vec<(&'a str, &'a Qrels)>,
    pub candidates: Option<&'a [CandidateMention]>,
    pub dictionary: Option<&'a DialectDictionary>,
    /// Named exact-match measurements, e.g. `without`, `translated`.
    pub exact_match: Vec<(&'a str, &'a ExactMatchStats)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatRow {
    pub dialect: String,
    pub statistic: String,
    pub value: String,
    pub n: usize,
}

fn row(dialect: &DialectCode, statistic: impl Into<String>, value: impl Into<String>, n: usize) -> StatRow {
    StatRow {
        dialect: dialect.to_string(),
        statistic: statistic.into(),
        value: value.into(),
        n,
    }
}

fn mean(sum: usize, n: usize) -> String {
    if n == 0 {
        "0.0000".into()
    } else {
        format!("{:.4}", sum as f64 / n as f64)
    }
}

/// Judged-document means are per query with at least one judgment.
pub fn collection_stats(inputs: &StatsInputs<'_>) -> Vec<StatRow> {
    let mut dialects: BTreeSet<DialectCode> = inputs.corpus.iter().map(|a| a.dialect.clone()).collect();
    dialects.extend(inputs.query_dialects.values().cloned());
    if let Some(dict) = inputs.dictionary {
        dialects.extend(dict.entries.keys().map(|(d, _)| d.clone()));
    }

    let mut rows = Vec::new();
    for dialect in &dialects {
        let articles = inputs.corpus.iter().filter(|a| &a.dialect == dialect).count();
        rows.push(row(dialect, "articles", articles.to_string(), articles));
        let linked = inputs
            .corpus
            .iter()
            .filter(|a| &a.dialect == dialect && a.german_title.is_some())
            .count();
        rows.push(row(dialect, "articles_with_german_title", linked.to_string(), articles));

        let in_dialect = |qid: &str| inputs.query_dialects.get(qid) == Some(dialect);
        let queries = inputs.query_dialects.values().filter(|d| *d == dialect).count();
        rows.push(row(dialect, "queries", queries.to_string(), queries));

        if let Some(split) = inputs.split {
            for s in Split::ALL {
                let count = split.qids(s).filter(|q| in_dialect(q)).count();
                rows.push(row(dialect, format!("split_{s}"), count.to_string(), count));
            }
        }

        for (name, qrels) in &inputs.qrels {
            let judged: Vec<usize> = qrels
                .labels
                .iter()
                .filter(|(q, l)| in_dialect(q) && !l.is_empty())
                .map(|(_, l)| l.len())
                .collect();
            let n = judged.len();
            rows.push(row(dialect, format!("{name}_judged_per_query"), mean(judged.iter().sum(), n), n));
        }

        if let Some(candidates) = inputs.candidates {
            let mine: Vec<&CandidateMention> = candidates.iter().filter(|c| &c.dialect == dialect).collect();
            let entities: BTreeSet<&str> = mine.iter().map(|c| c.entity_title.as_str()).collect();
            rows.push(row(dialect, "candidate_mentions", mine.len().to_string(), mine.len()));
            rows.push(row(dialect, "candidate_entities", entities.len().to_string(), entities.len()));
        }

        if let Some(dict) = inputs.dictionary {
            let entries: Vec<usize> = dict
                .entries
                .iter()
                .filter(|((d, _), _)| d == dialect)
                .map(|(_, e)| e.variants.len())
                .collect();
            let n = entries.len();
            let total: usize = entries.iter().sum();
            rows.push(row(dialect, "dictionary_entities", n.to_string(), n));
            rows.push(row(dialect, "dictionary_variants", total.to_string(), n));
            rows.push(row(dialect, "variants_per_entity", mean(total, n), n));
        }

        for (name, stats) in &inputs.exact_match {
            let (hits, total) = stats.per_dialect.get(dialect).copied().unwrap_or((0, 0));
            let value = if total == 0 {
                "0.00".to_owned()
            } else {
                format!("{:.2}", 100.0 * hits as f64 / total as f64)
            };
            rows.push(row(dialect, format!("exact_match_{name}_percent"), value, total));
        }
    }
    rows
}

pub fn write_stats_tsv<W: Write>(mut out: W, rows: &[StatRow]) -> std::io::Result<()> {
    writeln!(out, "dialect\tstatistic\tvalue\tn")?;
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}", r.dialect, r.statistic, r.value, r.n)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialect::DictionaryEntry;

    fn value<'a>(rows: &'a [StatRow], statistic: &str) -> (&'a str, usize) {
        let r = rows.iter().find(|r| r.statistic == statistic).unwrap();
        (r.value.as_str(), r.n)
    }

    #[test]
    fn variants_per_entity_average() {
        let bar = DialectCode::new("bar").unwrap();
        let mut dict = DialectDictionary::default();
        for (entity, n) in [("Minga", 2), ("Boarn", 3)] {
            let variants = (0..n).map(|i| format!("{entity}{i}")).collect();
            dict.entries.insert((bar.clone(), entity.into()), DictionaryEntry { german_title: None, variants });
        }
        let rows = collection_stats(&StatsInputs {
            dictionary: Some(&dict),
            ..Default::default()
        });
        assert_eq!(value(&rows, "variants_per_entity"), ("2.5000", 2));
    }

    #[test]
    fn empty_dictionary_reports_zero_with_n() {
        let dict = DialectDictionary::default();
        let mut query_dialects = BTreeMap::new();
        query_dialects.insert("als-1".to_owned(), DialectCode::new("als").unwrap());
        let rows = collection_stats(&StatsInputs {
            dictionary: Some(&dict),
            query_dialects,
            ..Default::default()
        });
        assert_eq!(value(&rows, "variants_per_entity"), ("0.0000", 0));
        let mut out = Vec::new();
        write_stats_tsv(&mut out, &rows).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("als\tvariants_per_entity\t0.0000\t0\n"));
    }
}
