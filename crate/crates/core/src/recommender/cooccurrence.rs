use std::collections::{BTreeSet, HashMap};

use super::llr::ContingencyCounts;
use super::{check_ids, CorpusError, DocumentRecord, Tokenizer};
use crate::vocabulary::Term;

/// Document-level co-occurrence counts between free terms and controlled terms.
#[derive(Debug, Clone)]
pub struct CooccurrenceCounts {
    corpus_size: u64,
    free_terms: Vec<String>,
    free_ids: HashMap<String, u32>,
    free_df: Vec<u64>,
    controlled: Vec<Term>,
    controlled_ids: HashMap<String, u32>,
    controlled_df: Vec<u64>,
    pairs: HashMap<(u32, u32), u64>,
}

impl CooccurrenceCounts {
    pub fn corpus_size(&self) -> u64 {
        self.corpus_size
    }

    /// Number of (free, controlled) pairs seen together at least once.
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn free_document_frequency(&self, free: &str) -> u64 {
        self.free_ids.get(free).map_or(0, |&i| self.free_df[i as usize])
    }

    pub fn controlled_document_frequency(&self, controlled: &str) -> u64 {
        self.controlled_ids
            .get(&crate::vocabulary::normalize(controlled))
            .map_or(0, |&i| self.controlled_df[i as usize])
    }

    fn table(&self, free: u32, ctrl: u32, k11: u64) -> ContingencyCounts {
        let k12 = self.free_df[free as usize] - k11;
        let k21 = self.controlled_df[ctrl as usize] - k11;
        ContingencyCounts::new(k11, k12, k21, self.corpus_size - k11 - k12 - k21)
    }

    /// Contingency table for a pair; `None` if they never co-occur.
    pub fn get(&self, free: &str, controlled: &str) -> Option<ContingencyCounts> {
        let f = *self.free_ids.get(free)?;
        let c = *self.controlled_ids.get(&crate::vocabulary::normalize(controlled))?;
        self.pairs.get(&(f, c)).map(|&k11| self.table(f, c, k11))
    }

    /// Every co-occurring pair with its table, in no particular order.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &Term, ContingencyCounts)> + '_ {
        self.pairs.iter().map(|(&(f, c), &k11)| {
            (
                self.free_terms[f as usize].as_str(),
                &self.controlled[c as usize],
                self.table(f, c, k11),
            )
        })
    }
}

/// Returns the id for `name`, and whether it was newly assigned.
fn intern(name: &str, ids: &mut HashMap<String, u32>, df: &mut Vec<u64>) -> (u32, bool) {
    if let Some(&id) = ids.get(name) {
        return (id, false);
    }
    let id = df.len() as u32;
    ids.insert(name.to_string(), id);
    df.push(0);
    (id, true)
}

/// Counts, for every free/controlled pair that co-occurs in at least one
/// document, the four cells of its document contingency table.
///
/// Controlled terms are matched on their normalized form and keep the first
/// display form seen in the corpus.
pub fn count_cooccurrences(corpus: &[DocumentRecord], tokenizer: &Tokenizer) -> Result<CooccurrenceCounts, CorpusError> {
    check_ids(corpus)?;
    let mut counts = CooccurrenceCounts {
        corpus_size: corpus.len() as u64,
        free_terms: Vec::new(),
        free_ids: HashMap::new(),
        free_df: Vec::new(),
        controlled: Vec::new(),
        controlled_ids: HashMap::new(),
        controlled_df: Vec::new(),
        pairs: HashMap::new(),
    };

    for doc in corpus {
        let free: Vec<u32> = tokenizer
            .free_terms(&doc.title, doc.abstract_text.as_deref())
            .into_iter()
            .map(|t| {
                let (id, new) = intern(&t, &mut counts.free_ids, &mut counts.free_df);
                if new {
                    counts.free_terms.push(t);
                }
                id
            })
            .collect();

        let mut ctrl = BTreeSet::new();
        for raw in &doc.controlled_terms {
            let term = Term::new(raw.trim());
            if term.is_blank() {
                continue;
            }
            let (id, new) = intern(term.normalized(), &mut counts.controlled_ids, &mut counts.controlled_df);
            if new {
                counts.controlled.push(term);
            }
            ctrl.insert(id);
        }

        for &f in &free {
            counts.free_df[f as usize] += 1;
        }
        for &c in &ctrl {
            counts.controlled_df[c as usize] += 1;
            for &f in &free {
                *counts.pairs.entry((f, c)).or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}
