//! Search term recommender: maps free natural-language terms to controlled
//! vocabulary terms by co-word analysis over an indexed document collection.
//!
//! Training counts, per document, which free title/abstract terms co-occur
//! with which assigned controlled terms, weights every pair with the
//! log-likelihood ratio statistic, and keeps the strongest controlled terms
//! per free term. At query time the input is tokenized the same way and the
//! per-token lists are merged by summing weights.

mod cooccurrence;
mod llr;
mod table;

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::error::LineError;
use crate::suggesters::Thesaurus;

pub use cooccurrence::{count_cooccurrences, CooccurrenceCounts};
pub use llr::{llr, ContingencyCounts};
pub use table::{
    build_association_table, build_association_table_with, Association, AssociationParams, AssociationTable,
    TableError, TableMeta, TABLE_FORMAT_VERSION,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default)]
    pub controlled_terms: Vec<String>,
}

impl DocumentRecord {
    pub fn new(id: &str, title: &str, abstract_text: Option<&str>, controlled_terms: &[&str]) -> Self {
        DocumentRecord {
            id: id.to_string(),
            title: title.to_string(),
            abstract_text: abstract_text.map(str::to_string),
            controlled_terms: controlled_terms.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("corpus is empty")]
    Empty,
    #[error("document {index} has an empty id")]
    EmptyId { index: usize },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
}

/// A controlled term assigned to a document that the thesaurus does not list
/// as a descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusViolation {
    pub document_id: String,
    pub term: String,
}

/// Reports every assigned controlled term that is not a thesaurus descriptor.
pub fn check_controlled_terms(corpus: &[DocumentRecord], thesaurus: &Thesaurus) -> Vec<CorpusViolation> {
    corpus
        .iter()
        .flat_map(|doc| {
            doc.controlled_terms
                .iter()
                .filter(|t| !thesaurus.is_descriptor(t))
                .map(|t| CorpusViolation {
                    document_id: doc.id.clone(),
                    term: t.clone(),
                })
        })
        .collect()
}

/// Reads one JSON document record per line. Blank lines are skipped.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<DocumentRecord>, LineError> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| LineError::new(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = serde_json::from_str(&line).map_err(|e| LineError::new(i + 1, e.to_string()))?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Splits free text into lowercase word tokens.
///
/// Tokens are runs of letters, with a hyphen kept only between two letters.
/// Tokens shorter than `min_len` characters and stopwords are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    pub min_len: usize,
    #[serde(default)]
    pub stopwords: BTreeSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            min_len: 2,
            stopwords: BTreeSet::new(),
        }
    }
}

impl Tokenizer {
    pub fn with_stopwords<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        Tokenizer {
            stopwords: words.into_iter().map(|w| w.to_lowercase()).collect(),
            ..Tokenizer::default()
        }
    }

    /// Tokens of `text` in reading order, duplicates kept.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let text: String = text.nfc().collect::<String>().to_lowercase();
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            // a hyphen stays only between two letters
            let inner_hyphen = c == '-' && !current.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphabetic());
            if c.is_alphabetic() || inner_hyphen {
                current.push(c);
            } else if !current.is_empty() {
                self.flush(&mut current, &mut out);
            }
        }
        self.flush(&mut current, &mut out);
        out
    }

    fn flush(&self, current: &mut String, out: &mut Vec<String>) {
        let token = std::mem::take(current);
        if token.chars().count() >= self.min_len && !self.stopwords.contains(&token) {
            out.push(token);
        }
    }

    /// Distinct free terms of a document's title and abstract.
    pub fn free_terms(&self, title: &str, abstract_text: Option<&str>) -> BTreeSet<String> {
        let mut terms: BTreeSet<String> = self.tokens(title).into_iter().collect();
        if let Some(a) = abstract_text {
            terms.extend(self.tokens(a));
        }
        terms
    }
}

/// Free terms of a title and optional abstract under the default tokenizer.
pub fn tokenize_free_text(title: &str, abstract_text: Option<&str>) -> BTreeSet<String> {
    Tokenizer::default().free_terms(title, abstract_text)
}

pub(crate) fn check_ids(corpus: &[DocumentRecord]) -> Result<(), CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut ids = HashSet::with_capacity(corpus.len());
    for (index, doc) in corpus.iter().enumerate() {
        if doc.id.is_empty() {
            return Err(CorpusError::EmptyId { index });
        }
        if !ids.insert(doc.id.as_str()) {
            return Err(CorpusError::DuplicateId(doc.id.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenizer_examples() {
        assert_eq!(tokenize_free_text("Accident analysis", None), set(&["accident", "analysis"]));
        assert!(tokenize_free_text("", None).is_empty());
        assert_eq!(
            tokenize_free_text("Mother-child clinic", Some("clinic study")),
            set(&["mother-child", "clinic", "study"])
        );
    }

    #[test]
    fn tokenizer_edge_cases() {
        let t = Tokenizer::default();
        assert_eq!(t.tokens("a -x- y-- 2020 Über-Ich, e.g. x-ray"), ["über-ich", "x-ray"]);
        assert_eq!(t.tokens("state-"), ["state"]);
    }

    #[test]
    fn stopwords_are_dropped() {
        let t = Tokenizer::with_stopwords(["The", "of"]);
        assert_eq!(t.tokens("The Sociology of Work"), ["sociology", "work"]);
    }

    #[test]
    fn corpus_id_checks() {
        assert_eq!(check_ids(&[]), Err(CorpusError::Empty));
        let a = DocumentRecord::new("a", "x", None, &[]);
        let dup = vec![a.clone(), a.clone()];
        assert_eq!(check_ids(&dup), Err(CorpusError::DuplicateId("a".into())));
        let blank = vec![DocumentRecord::new("", "x", None, &[])];
        assert_eq!(check_ids(&blank), Err(CorpusError::EmptyId { index: 0 }));
    }

    #[test]
    fn corpus_reader_and_violations() {
        let text = r#"{"id":"1","title":"Medicine today","abstract":"x","controlled_terms":["Doctor-patient-relationship"]}

{"id":"2","title":"Clinic","controlled_terms":["hospital"]}
"#;
        let docs = read_corpus(text.as_bytes()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].abstract_text, None);
        let ts = Thesaurus::from_descriptors(["Doctor-patient-relationship"]);
        assert_eq!(
            check_controlled_terms(&docs, &ts),
            vec![CorpusViolation {
                document_id: "2".into(),
                term: "hospital".into()
            }]
        );
        let err = read_corpus("{\"id\":\"1\"}\n{bad\n".as_bytes()).unwrap_err();
        assert_eq!(err.line, 1);
    }
}
