use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use wikidir::collection::{discretize_scores, jenks_breaks, label_query, split_dataset, SplitRatios};
use wikidir::lexindex::{tokenize, Bm25Params, InvertedIndex};
use wikidir::{DialectCode, Query};

const WORDS: [&str; 8] = ["minga", "stodt", "isar", "brezn", "kanton", "lozärn", "bärn", "see"];

fn corpus() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0usize..WORDS.len(), 1..15), 1..12)
}

fn texts(corpus: &[Vec<usize>]) -> Vec<(String, String)> {
    corpus
        .iter()
        .enumerate()
        .map(|(i, words)| (format!("d{i:02}"), words.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ")))
        .collect()
}

fn build(docs: &[(String, String)]) -> InvertedIndex {
    InvertedIndex::build(docs.iter().map(|(id, t)| (id.as_str(), t.as_str())), Bm25Params::default()).unwrap()
}

/// Lucene BM25 by counting tokens in every document.
fn scan(docs: &[(String, String)], query: &str) -> Vec<(String, f64)> {
    let tokens: Vec<Vec<String>> = docs.iter().map(|(_, t)| tokenize(t).iter().map(|x| x.to_string()).collect()).collect();
    let n = docs.len() as f64;
    let avgdl = tokens.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let terms: BTreeSet<String> = tokenize(query).iter().map(|t| t.to_string()).collect();
    let mut out = Vec::new();
    for ((id, _), toks) in docs.iter().zip(&tokens) {
        let mut score = 0.0;
        let mut hit = false;
        for term in &terms {
            let tf = toks.iter().filter(|t| *t == term).count() as f64;
            if tf > 0.0 {
                hit = true;
                let df = tokens.iter().filter(|d| d.contains(term)).count() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                score += idf * tf * 1.9 / (tf + 0.9 * (0.6 + 0.4 * toks.len() as f64 / avgdl));
            }
        }
        if hit {
            out.push((id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Least SSD over every contiguous partition of sorted `v` into `k` classes.
fn brute_jenks_cost(v: &[f64], k: usize) -> f64 {
    fn ssd(v: &[f64]) -> f64 {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mean).powi(2)).sum()
    }
    fn go(v: &[f64], k: usize) -> f64 {
        if k == 1 {
            return ssd(v);
        }
        (1..=v.len() - (k - 1)).map(|i| ssd(&v[..i]) + go(&v[i..], k - 1)).fold(f64::INFINITY, f64::min)
    }
    (1..=k.min(v.len())).map(|c| go(v, c)).fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn search_matches_linear_scan(c in corpus(), q in prop::collection::vec(0usize..WORDS.len(), 1..4)) {
        let docs = texts(&c);
        let index = build(&docs);
        let query = q.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ");
        let expected = scan(&docs, &query);
        let got = index.search(&query, docs.len(), None).unwrap();
        prop_assert_eq!(got.len(), expected.len());
        for (g, (id, s)) in got.iter().zip(&expected) {
            prop_assert_eq!(&g.doc_id, id);
            prop_assert!((g.score - s).abs() < 1e-9);
        }
    }

    #[test]
    fn index_statistics_are_consistent(c in corpus()) {
        let docs = texts(&c);
        let index = build(&docs);
        prop_assert_eq!(index.doc_count(), docs.len());
        let lengths: Vec<usize> = docs.iter().map(|(id, _)| index.doc_length(id).unwrap()).collect();
        let mean = lengths.iter().sum::<usize>() as f64 / lengths.len() as f64;
        prop_assert!((index.avg_doc_length() - mean).abs() < 1e-12);
        let ids = index.doc_ids();
        prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        for (_, postings) in index.terms() {
            prop_assert!(postings.windows(2).all(|w| ids[w[0].doc as usize] < ids[w[1].doc as usize]));
        }
    }

    #[test]
    fn jenks_cost_is_optimal(v in prop::collection::vec(0u32..1000, 1..10), k in 1usize..6) {
        let mut v: Vec<f64> = v.into_iter().map(|x| f64::from(x) / 7.0).collect();
        v.sort_by(f64::total_cmp);
        let ranges = jenks_breaks(&v, k).unwrap();
        let mut cost = 0.0;
        let mut at = 0;
        for r in &ranges {
            let class = &v[at..at + r.count];
            prop_assert!(class.iter().all(|x| *x >= r.lower && *x <= r.upper));
            let mean = class.iter().sum::<f64>() / class.len() as f64;
            cost += class.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
            at += r.count;
        }
        prop_assert_eq!(at, v.len());
        let best = brute_jenks_cost(&v, k);
        prop_assert!((cost - best).abs() <= 1e-6 * best.max(1.0), "{} vs {}", cost, best);
    }

    #[test]
    fn labels_survive_affine_maps(scores in prop::collection::vec(0u32..100, 1..30), a in 0.01f64..100.0, b in -50.0f64..50.0) {
        let raw: BTreeMap<String, f64> = scores.iter().enumerate().map(|(i, &s)| (format!("d{i}"), f64::from(s))).collect();
        let moved: BTreeMap<String, f64> = raw.iter().map(|(d, s)| (d.clone(), a * s + b)).collect();
        let labels = discretize_scores(&raw);
        prop_assert!(labels.values().all(|l| (1..=5).contains(l)));
        prop_assert_eq!(discretize_scores(&moved), labels);
    }

    #[test]
    fn one_self_label_per_query(c in corpus(), self_doc in 0usize..12, q in prop::collection::vec(0usize..WORDS.len(), 1..3)) {
        let docs = texts(&c);
        let index = build(&docs);
        let self_id = format!("d{:02}", self_doc % docs.len());
        let title = q.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ");
        let labels = label_query(&index, &title, std::slice::from_ref(&title), &self_id);
        prop_assert!(labels.values().all(|l| (1..=6).contains(l)));
        let sixes: Vec<&String> = labels.iter().filter(|(_, &l)| l == 6).map(|(d, _)| d).collect();
        prop_assert_eq!(sixes, vec![&self_id]);
    }

    #[test]
    fn split_is_a_total_partition(n in 0usize..80, analysis_mask in any::<u64>(), seed in any::<u64>()) {
        let dialect = DialectCode::new("bar").unwrap();
        let queries: Vec<Query> = (0..n)
            .map(|i| Query {
                qid: format!("bar-{i}"),
                dialect: dialect.clone(),
                dialect_title: format!("T{i}"),
                entity_title: format!("T{i}"),
                german_title: Some(format!("G{i}")),
                text: format!("G{i}"),
            })
            .collect();
        let analysis: BTreeSet<String> = (0..n.min(64)).filter(|i| analysis_mask >> i & 1 == 1).map(|i| format!("bar-{i}")).collect();
        let split = split_dataset(&queries, &analysis, seed, SplitRatios::default());
        let assigned: BTreeSet<&String> = split.assignment.keys().collect();
        prop_assert_eq!(assigned.len(), n);
        prop_assert!(queries.iter().all(|q| assigned.contains(&q.qid)));
        prop_assert_eq!(split.counts().iter().sum::<usize>(), n);
        prop_assert_eq!(split.counts()[3], analysis.len());
    }
}
