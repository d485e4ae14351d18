//! The three single-vocabulary suggestion services: frequency-ranked user
//! search terms, cross-concordance related terms, and thesaurus descriptors.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::LineError;
use crate::vocabulary::{normalize, EntryKind, PrefixIndex, RankOrder, Term, VocabularyEntry};

/// Which vocabulary produced a suggestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "UST")]
    UserSearchTerms,
    #[serde(rename = "HTS")]
    Concordance,
    #[serde(rename = "TS")]
    Thesaurus,
    #[serde(rename = "STR")]
    Recommender,
}

impl Source {
    pub fn code(self) -> &'static str {
        match self {
            Source::UserSearchTerms => "UST",
            Source::Concordance => "HTS",
            Source::Thesaurus => "TS",
            Source::Recommender => "STR",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub term: Term,
    pub source: Source,
    /// 1-based rank in the displayed list.
    pub position: usize,
}

/// Numbers `terms` consecutively starting at `first_position`.
pub fn number_terms(terms: impl IntoIterator<Item = Term>, source: Source, first_position: usize) -> Vec<Suggestion> {
    terms
        .into_iter()
        .enumerate()
        .map(|(i, term)| Suggestion {
            term,
            source,
            position: first_position + i,
        })
        .collect()
}

/// User search terms ranked by how often they were searched.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "PrefixIndex", into = "PrefixIndex")]
pub struct UserTerms {
    index: PrefixIndex,
}

impl From<PrefixIndex> for UserTerms {
    fn from(index: PrefixIndex) -> Self {
        UserTerms { index }
    }
}

impl From<UserTerms> for PrefixIndex {
    fn from(u: UserTerms) -> Self {
        u.index
    }
}

impl UserTerms {
    pub fn new(entries: impl IntoIterator<Item = VocabularyEntry>) -> Self {
        UserTerms {
            index: PrefixIndex::build(entries),
        }
    }

    pub fn index(&self) -> &PrefixIndex {
        &self.index
    }

    /// Prefix matches ordered by frequency descending, then alphabetically.
    pub fn suggest(&self, input: &str, limit: usize) -> Vec<Suggestion> {
        let hits = self.index.lookup(input, limit, RankOrder::FrequencyDesc);
        number_terms(hits.into_iter().map(|e| e.term.clone()), Source::UserSearchTerms, 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Equivalence,
    Broader,
    Narrower,
    Association,
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eq" => Ok(Relation::Equivalence),
            "bt" => Ok(Relation::Broader),
            "nt" => Ok(Relation::Narrower),
            "rel" => Ok(Relation::Association),
            other => Err(format!("unknown relation {other:?} (expected eq, bt, nt or rel)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    pub source_vocab: String,
    pub source_term: Term,
    pub relation: Relation,
    pub target_vocab: String,
    pub target_term: Term,
}

impl Mapping {
    pub fn new(source_vocab: &str, source_term: &str, relation: Relation, target_vocab: &str, target_term: &str) -> Self {
        Mapping {
            source_vocab: source_vocab.to_string(),
            source_term: Term::new(source_term),
            relation,
            target_vocab: target_vocab.to_string(),
            target_term: Term::new(target_term),
        }
    }

    fn is_self_mapping(&self) -> bool {
        self.source_vocab == self.target_vocab && self.source_term.normalized() == self.target_term.normalized()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConcordanceError {
    #[error("mapping {index} maps {vocab}:{term:?} onto itself")]
    SelfMapping { index: usize, vocab: String, term: String },
    #[error("mapping {index} has a blank term")]
    BlankTerm { index: usize },
}

/// How many matched source terms feed one related-terms lookup.
pub const DEFAULT_MAX_SOURCE_TERMS: usize = 5;

/// Intellectually created mappings between the terms of several vocabularies.
///
/// Input is prefix-matched against every mapped source term; the targets of
/// the alphabetically first few matches are merged into one flat list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Mapping>", into = "Vec<Mapping>")]
pub struct CrossConcordance {
    mappings: Vec<Mapping>,
    source_index: PrefixIndex,
    targets: HashMap<String, Vec<Term>>,
    max_source_terms: usize,
}

impl CrossConcordance {
    pub fn new(mappings: Vec<Mapping>) -> Result<Self, ConcordanceError> {
        let mut targets: HashMap<String, Vec<Term>> = HashMap::new();
        for (index, m) in mappings.iter().enumerate() {
            if m.source_term.is_blank() || m.target_term.is_blank() {
                return Err(ConcordanceError::BlankTerm { index });
            }
            if m.is_self_mapping() {
                return Err(ConcordanceError::SelfMapping {
                    index,
                    vocab: m.source_vocab.clone(),
                    term: m.source_term.display().to_string(),
                });
            }
            targets
                .entry(m.source_term.normalized().to_string())
                .or_default()
                .push(m.target_term.clone());
        }
        let source_index = PrefixIndex::build(
            mappings
                .iter()
                .map(|m| VocabularyEntry::new(m.source_term.display(), EntryKind::MappedTerm)),
        );
        Ok(CrossConcordance {
            mappings,
            source_index,
            targets,
            max_source_terms: DEFAULT_MAX_SOURCE_TERMS,
        })
    }

    pub fn with_max_source_terms(mut self, n: usize) -> Self {
        self.max_source_terms = n.max(1);
        self
    }

    pub fn mappings(&self) -> &[Mapping] {
        &self.mappings
    }

    /// Mapped targets of controlled terms that prefix-match `input`, deduplicated
    /// on normalized form and sorted alphabetically.
    pub fn suggest(&self, input: &str, limit: usize) -> Vec<Suggestion> {
        let matched = self
            .source_index
            .lookup(input, self.max_source_terms, RankOrder::Alphabetical);
        let mut merged: BTreeMap<&str, &Term> = BTreeMap::new();
        for source in matched {
            for target in self.targets.get(source.normalized()).into_iter().flatten() {
                merged.entry(target.normalized()).or_insert(target);
            }
        }
        number_terms(merged.into_values().take(limit).cloned(), Source::Concordance, 1)
    }
}

impl TryFrom<Vec<Mapping>> for CrossConcordance {
    type Error = ConcordanceError;

    fn try_from(mappings: Vec<Mapping>) -> Result<Self, Self::Error> {
        CrossConcordance::new(mappings)
    }
}

impl From<CrossConcordance> for Vec<Mapping> {
    fn from(c: CrossConcordance) -> Self {
        c.mappings
    }
}

/// Reads `source_vocab TAB source_term TAB relation TAB target_vocab TAB target_term`.
pub fn parse_concordance<R: BufRead>(reader: R) -> Result<CrossConcordance, LineError> {
    let mut mappings = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| LineError::new(line_no, e.to_string()))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [sv, st, rel, tv, tt] = fields[..] else {
            return Err(LineError::new(line_no, format!("expected 5 fields, found {}", fields.len())));
        };
        let relation = rel.parse().map_err(|e: String| LineError::new(line_no, e))?;
        mappings.push(Mapping::new(sv, st, relation, tv, tt));
        lines.push(line_no);
    }
    CrossConcordance::new(mappings).map_err(|e| {
        let index = match &e {
            ConcordanceError::SelfMapping { index, .. } | ConcordanceError::BlankTerm { index } => *index,
        };
        LineError::new(lines[index], e.to_string())
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThesaurusError {
    #[error("{0:?} is listed both as descriptor and non-descriptor")]
    Overlap(String),
    #[error("non-descriptor {term:?} points to {target:?}, which is not a descriptor")]
    UnknownTarget { term: String, target: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ThesaurusData {
    descriptors: Vec<Term>,
    non_descriptors: Vec<(Term, Option<Term>)>,
}

/// Descriptors and non-descriptors of a thesaurus.
///
/// Only descriptors are suggested. The USE pointers of non-descriptors are
/// kept for resolvers but not consulted by [`Thesaurus::suggest`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ThesaurusData", into = "ThesaurusData")]
pub struct Thesaurus {
    descriptors: PrefixIndex,
    non_descriptors: Vec<(Term, Option<Term>)>,
}

impl Thesaurus {
    pub fn new(
        descriptors: impl IntoIterator<Item = Term>,
        non_descriptors: impl IntoIterator<Item = (Term, Option<Term>)>,
    ) -> Result<Self, ThesaurusError> {
        let descriptors = PrefixIndex::build(
            descriptors
                .into_iter()
                .map(|t| VocabularyEntry::new(t.display(), EntryKind::Descriptor)),
        );
        let mut kept: Vec<(Term, Option<Term>)> = Vec::new();
        let mut seen = HashSet::new();
        for (term, target) in non_descriptors.into_iter().filter(|(t, _)| !t.is_blank()) {
            if descriptors.get(term.normalized()).is_some() {
                return Err(ThesaurusError::Overlap(term.display().to_string()));
            }
            if let Some(target) = &target {
                if descriptors.get(target.normalized()).is_none() {
                    return Err(ThesaurusError::UnknownTarget {
                        term: term.display().to_string(),
                        target: target.display().to_string(),
                    });
                }
            }
            if seen.insert(term.normalized().to_string()) {
                kept.push((term, target));
            }
        }
        Ok(Thesaurus {
            descriptors,
            non_descriptors: kept,
        })
    }

    pub fn from_descriptors<'a>(descriptors: impl IntoIterator<Item = &'a str>) -> Self {
        Thesaurus::new(descriptors.into_iter().map(Term::new), Vec::new())
            .expect("descriptor-only thesaurus is always valid")
    }

    pub fn descriptor_index(&self) -> &PrefixIndex {
        &self.descriptors
    }

    pub fn is_descriptor(&self, term: &str) -> bool {
        self.descriptors.get(term).is_some()
    }

    pub fn non_descriptors(&self) -> &[(Term, Option<Term>)] {
        &self.non_descriptors
    }

    /// The descriptor a non-descriptor points to.
    pub fn use_instead(&self, term: &str) -> Option<&Term> {
        let key = normalize(term);
        self.non_descriptors
            .iter()
            .find(|(t, _)| t.normalized() == key)
            .and_then(|(_, target)| target.as_ref())
    }

    /// Descriptors that prefix-match `input`, alphabetically.
    pub fn suggest(&self, input: &str, limit: usize) -> Vec<Suggestion> {
        let hits = self.descriptors.lookup(input, limit, RankOrder::Alphabetical);
        number_terms(hits.into_iter().map(|e| e.term.clone()), Source::Thesaurus, 1)
    }
}

impl TryFrom<ThesaurusData> for Thesaurus {
    type Error = ThesaurusError;

    fn try_from(data: ThesaurusData) -> Result<Self, Self::Error> {
        Thesaurus::new(data.descriptors, data.non_descriptors)
    }
}

impl From<Thesaurus> for ThesaurusData {
    fn from(t: Thesaurus) -> Self {
        ThesaurusData {
            descriptors: t.descriptors.entries().iter().map(|e| e.term.clone()).collect(),
            non_descriptors: t.non_descriptors,
        }
    }
}

/// Reads `term TAB kind(d|nd) [TAB use_instead]`.
pub fn parse_thesaurus<R: BufRead>(reader: R) -> Result<Thesaurus, LineError> {
    let mut descriptors = Vec::new();
    let mut non_descriptors = Vec::new();
    let mut nd_lines = HashMap::new();
    let mut descriptor_lines = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| LineError::new(line_no, e.to_string()))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields[0].is_empty() {
            return Err(LineError::new(line_no, "empty term"));
        }
        let term = Term::new(fields[0]);
        match (fields.get(1).copied(), fields.get(2).copied(), fields.len()) {
            (Some("d"), None | Some(""), 2 | 3) => {
                descriptor_lines.entry(term.normalized().to_string()).or_insert(line_no);
                descriptors.push(term);
            }
            (Some("nd"), target, 2 | 3) => {
                let target = target.filter(|t| !t.is_empty()).map(Term::new);
                nd_lines.entry(term.normalized().to_string()).or_insert(line_no);
                non_descriptors.push((term, target));
            }
            (Some("d"), Some(_), _) => {
                return Err(LineError::new(line_no, "descriptors take no use_instead field"));
            }
            (kind, _, n) if n <= 3 => {
                return Err(LineError::new(line_no, format!("bad kind {:?} (expected d or nd)", kind.unwrap_or(""))));
            }
            _ => return Err(LineError::new(line_no, "too many fields")),
        }
    }
    Thesaurus::new(descriptors, non_descriptors).map_err(|e| {
        let term = match &e {
            ThesaurusError::Overlap(t) | ThesaurusError::UnknownTarget { term: t, .. } => normalize(t),
        };
        let line = nd_lines.get(&term).or(descriptor_lines.get(&term)).copied().unwrap_or(0);
        LineError::new(line, e.to_string())
    })
}
