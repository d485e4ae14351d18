use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cooccurrence::count_cooccurrences;
use super::llr::llr;
use super::{CorpusError, DocumentRecord, Tokenizer};
use crate::suggesters::{number_terms, Source, Suggestion};
use crate::vocabulary::{normalize, Term};

pub const TABLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationParams {
    /// Pairs seen together in fewer documents are discarded.
    pub min_count: u64,
    /// Controlled terms kept per free term.
    pub top_k: usize,
}

impl Default for AssociationParams {
    fn default() -> Self {
        AssociationParams { min_count: 2, top_k: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub term: Term,
    pub weight: f64,
    /// Documents carrying both terms.
    pub cooccurrences: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub corpus_size: u64,
    pub min_count: u64,
    pub top_k: usize,
    /// RFC 3339; left empty by builds so identical corpora give identical tables.
    #[serde(default)]
    pub built_at: Option<String>,
    pub tokenizer: Tokenizer,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed association table: {0}")]
    Format(String),
    #[error("unsupported table version {found} (expected {TABLE_FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("invariant violated for {term:?}: {reason}")]
    Invariant { term: String, reason: String },
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    format_version: u32,
    meta: TableMeta,
    entries: BTreeMap<String, Vec<Association>>,
}

/// Trained mapping from normalized free terms to weighted controlled terms.
///
/// Every list is sorted by weight descending, ties by normalized term.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationTable {
    meta: TableMeta,
    entries: BTreeMap<String, Vec<Association>>,
}

fn ranks_before(a: &Association, b: &Association) -> bool {
    a.weight > b.weight || (a.weight == b.weight && a.term.normalized() < b.term.normalized())
}

impl AssociationTable {
    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn set_built_at(&mut self, stamp: impl Into<String>) {
        self.meta.built_at = Some(stamp.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Associations of one free term, strongest first.
    pub fn lookup(&self, free_term: &str) -> &[Association] {
        self.entries.get(free_term).map_or(&[], Vec::as_slice)
    }

    pub fn free_terms(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Controlled terms for a query, scored by the summed weight over the
    /// query's distinct tokens and ordered by score, then alphabetically.
    pub fn recommend(&self, input: &str, limit: usize) -> Vec<(Term, f64)> {
        let mut scores: HashMap<&str, (&Term, f64)> = HashMap::new();
        for token in self.meta.tokenizer.free_terms(input, None) {
            for a in self.lookup(&token) {
                scores.entry(a.term.normalized()).or_insert((&a.term, 0.0)).1 += a.weight;
            }
        }
        let mut ranked: Vec<(&Term, f64)> = scores.into_values().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.normalized().cmp(b.0.normalized())));
        ranked.truncate(limit);
        ranked.into_iter().map(|(t, w)| (t.clone(), w)).collect()
    }

    pub fn suggest(&self, input: &str, limit: usize) -> Vec<Suggestion> {
        number_terms(self.recommend(input, limit).into_iter().map(|(t, _)| t), Source::Recommender, 1)
    }

    pub fn validate(&self) -> Result<(), TableError> {
        let fail = |term: &str, reason: String| TableError::Invariant {
            term: term.to_string(),
            reason,
        };
        for (free, list) in &self.entries {
            if free.is_empty() {
                return Err(fail(free, "empty free term".into()));
            }
            if list.len() > self.meta.top_k {
                return Err(fail(free, format!("{} entries exceed top_k {}", list.len(), self.meta.top_k)));
            }
            for a in list {
                if !(a.weight.is_finite() && a.weight >= 0.0) {
                    return Err(fail(free, format!("bad weight {}", a.weight)));
                }
                if a.cooccurrences < self.meta.min_count {
                    return Err(fail(free, format!("{} below min_count", a.term.display())));
                }
                if a.term.normalized() != normalize(a.term.display()) || a.term.is_blank() {
                    return Err(fail(free, format!("inconsistent term {:?}", a.term.display())));
                }
            }
            if let Some(w) = list.windows(2).find(|w| !ranks_before(&w[0], &w[1])) {
                return Err(fail(free, format!("{} not ranked before {}", w[0].term.display(), w[1].term.display())));
            }
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), TableError> {
        let raw = RawTable {
            format_version: TABLE_FORMAT_VERSION,
            meta: self.meta.clone(),
            entries: self.entries.clone(),
        };
        serde_json::to_writer(&mut w, &raw).map_err(|e| TableError::Format(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// Loads a table, checking the format version and every list invariant.
    pub fn read_json<R: Read>(r: R) -> Result<Self, TableError> {
        let value: serde_json::Value = serde_json::from_reader(r).map_err(|e| TableError::Format(e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| TableError::Format("missing format_version".into()))?;
        if found != u64::from(TABLE_FORMAT_VERSION) {
            return Err(TableError::Version { found: found as u32 });
        }
        let raw: RawTable = serde_json::from_value(value).map_err(|e| TableError::Format(e.to_string()))?;
        let table = AssociationTable {
            meta: raw.meta,
            entries: raw.entries,
        };
        table.validate()?;
        Ok(table)
    }
}

/// Trains a table with the default tokenizer.
pub fn build_association_table(
    corpus: &[DocumentRecord],
    params: AssociationParams,
) -> Result<AssociationTable, CorpusError> {
    build_association_table_with(corpus, params, Tokenizer::default())
}

/// Keeps, for each free term, the `top_k` controlled terms with the highest
/// G² weight among pairs that co-occur in at least `min_count` documents.
/// Parameters below 1 are raised to 1.
pub fn build_association_table_with(
    corpus: &[DocumentRecord],
    params: AssociationParams,
    tokenizer: Tokenizer,
) -> Result<AssociationTable, CorpusError> {
    let min_count = params.min_count.max(1);
    let top_k = params.top_k.max(1);
    let counts = count_cooccurrences(corpus, &tokenizer)?;

    let mut entries: BTreeMap<String, Vec<Association>> = BTreeMap::new();
    for (free, ctrl, table) in counts.pairs() {
        if table.k11 < min_count {
            continue;
        }
        entries.entry(free.to_string()).or_default().push(Association {
            term: ctrl.clone(),
            weight: llr(table),
            cooccurrences: table.k11,
        });
    }
    for list in entries.values_mut() {
        list.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.term.normalized().cmp(b.term.normalized()))
        });
        list.truncate(top_k);
    }

    Ok(AssociationTable {
        meta: TableMeta {
            corpus_size: counts.corpus_size(),
            min_count,
            top_k,
            built_at: None,
            tokenizer,
        },
        entries,
    })
}
