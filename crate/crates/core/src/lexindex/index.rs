use std::collections::{BTreeMap, BTreeSet};

use super::tokenize::{contains_phrase, tokenize, Token};
use super::IndexError;
use crate::collection::Document;

/// Lucene BM25 parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    /// Pyserini/Lucene defaults.
    fn default() -> Self {
        Self { k1: 0.9, b: 0.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    /// Position of the document in [`InvertedIndex::doc_ids`].
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

/// Immutable inverted index over tokenized documents.
///
/// Documents are numbered in ascending doc-id order, so posting lists sorted by
/// document number are also sorted by doc id, and the index does not depend on
/// input order.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    pub(crate) params: Bm25Params,
    pub(crate) doc_ids: Vec<String>,
    pub(crate) doc_tokens: Vec<Vec<Token>>,
    postings: BTreeMap<Token, Vec<Posting>>,
    avg_doc_length: f64,
}

pub fn build_index(docs: &[Document]) -> Result<InvertedIndex, IndexError> {
    InvertedIndex::build(
        docs.iter().map(|d| (d.doc_id.as_str(), d.text.as_str())),
        Bm25Params::default(),
    )
}

impl InvertedIndex {
    pub fn build<'a, I>(docs: I, params: Bm25Params) -> Result<Self, IndexError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        Self::from_tokens(
            docs.into_iter().map(|(id, text)| (id.to_owned(), tokenize(text))).collect(),
            params,
        )
    }

    pub(crate) fn from_tokens(mut docs: Vec<(String, Vec<Token>)>, params: Bm25Params) -> Result<Self, IndexError> {
        docs.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(pair) = docs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(IndexError::DuplicateDoc(pair[0].0.clone()));
        }
        let mut postings: BTreeMap<Token, Vec<Posting>> = BTreeMap::new();
        for (number, (_, tokens)) in docs.iter().enumerate() {
            let mut counts: BTreeMap<&Token, u32> = BTreeMap::new();
            for token in tokens {
                *counts.entry(token).or_default() += 1;
            }
            for (token, tf) in counts {
                postings.entry(token.clone()).or_default().push(Posting {
                    doc: number as u32,
                    tf,
                });
            }
        }
        let total: usize = docs.iter().map(|(_, t)| t.len()).sum();
        let avg_doc_length = if docs.is_empty() { 0.0 } else { total as f64 / docs.len() as f64 };
        let (doc_ids, doc_tokens) = docs.into_iter().unzip();
        Ok(Self {
            params,
            doc_ids,
            doc_tokens,
            postings,
            avg_doc_length,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    /// Mean document length in tokens; 0 for an empty index.
    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn contains_doc(&self, doc_id: &str) -> bool {
        self.doc_number(doc_id).is_some()
    }

    fn doc_number(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.binary_search_by(|id| id.as_str().cmp(doc_id)).ok()
    }

    pub fn doc_tokens(&self, doc_id: &str) -> Option<&[Token]> {
        self.doc_number(doc_id).map(|n| self.doc_tokens[n].as_slice())
    }

    pub fn doc_length(&self, doc_id: &str) -> Option<usize> {
        self.doc_tokens(doc_id).map(<[Token]>::len)
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Token, &[Posting])> {
        self.postings.iter().map(|(t, p)| (t, p.as_slice()))
    }

    pub fn doc_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    fn idf(&self, df: usize) -> f64 {
        let n = self.doc_count() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn term_frequency(&self, term: &str, doc: usize) -> u32 {
        let postings = self.postings(term);
        postings
            .binary_search_by_key(&(doc as u32), |p| p.doc)
            .map_or(0, |i| postings[i].tf)
    }

    fn score_number(&self, terms: &BTreeSet<&str>, doc: usize) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let dl = self.doc_tokens[doc].len() as f64;
        terms
            .iter()
            .map(|term| {
                let tf = self.term_frequency(term, doc);
                if tf == 0 {
                    return 0.0;
                }
                let tf = tf as f64;
                let norm = k1 * (1.0 - b + b * dl / self.avg_doc_length);
                self.idf(self.doc_frequency(term)) * tf * (k1 + 1.0) / (tf + norm)
            })
            .fold(0.0, |acc, s| acc + s)
    }

    /// BM25 of `doc_id` for the distinct terms in `query_terms`.
    pub fn bm25_score(&self, query_terms: &[Token], doc_id: &str) -> Result<f64, IndexError> {
        let doc = self
            .doc_number(doc_id)
            .ok_or_else(|| IndexError::UnknownDoc(doc_id.to_owned()))?;
        let terms: BTreeSet<&str> = query_terms.iter().map(Token::as_str).collect();
        Ok(self.score_number(&terms, doc))
    }

    /// Scores every eligible document, ordered by descending score then doc id.
    ///
    /// Without a gate, eligible documents share at least one query term. With a
    /// gate, eligible documents contain at least one gate phrase as a
    /// contiguous token run, whether or not they share query terms.
    pub fn candidates(&self, query_terms: &[Token], gate: Option<&[Vec<Token>]>) -> Vec<ScoredDoc> {
        let terms: BTreeSet<&str> = query_terms.iter().map(Token::as_str).collect();
        let eligible: BTreeSet<usize> = match gate {
            None => terms
                .iter()
                .flat_map(|t| self.postings(t).iter().map(|p| p.doc as usize))
                .collect(),
            Some(phrases) => phrases
                .iter()
                .filter(|p| !p.is_empty())
                .flat_map(|phrase| {
                    let rarest = phrase
                        .iter()
                        .min_by_key(|t| self.doc_frequency(t))
                        .expect("non-empty phrase");
                    self.postings(rarest)
                        .iter()
                        .map(|p| p.doc as usize)
                        .filter(|&doc| contains_phrase(&self.doc_tokens[doc], phrase))
                        .collect::<Vec<_>>()
                })
                .collect(),
        };
        let mut scored: Vec<ScoredDoc> = eligible
            .into_iter()
            .map(|doc| ScoredDoc {
                doc_id: self.doc_ids[doc].clone(),
                score: self.score_number(&terms, doc),
            })
            .collect();
        sort_scored(&mut scored);
        scored
    }

    /// Top-`k` documents for `query`. Never padded: fewer than `k` results are
    /// returned when fewer documents are eligible.
    pub fn search(&self, query: &str, k: usize, gate_phrases: Option<&[String]>) -> Result<Vec<ScoredDoc>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        let gate: Option<Vec<Vec<Token>>> = gate_phrases.map(|p| p.iter().map(|s| tokenize(s)).collect());
        let mut results = self.candidates(&tokenize(query), gate.as_deref());
        results.truncate(k);
        Ok(results)
    }
}

/// Descending score, ties by ascending doc id.
pub(crate) fn sort_scored(docs: &mut [ScoredDoc]) {
    docs.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
}

/// True iff `phrase` tokenizes to a contiguous run inside `doc_tokens`.
pub fn phrasal_match(doc_tokens: &[Token], phrase: &str) -> Result<bool, IndexError> {
    let phrase_tokens = tokenize(phrase);
    if phrase_tokens.is_empty() {
        return Err(IndexError::EmptyPhrase(phrase.to_owned()));
    }
    Ok(contains_phrase(doc_tokens, &phrase_tokens))
}
