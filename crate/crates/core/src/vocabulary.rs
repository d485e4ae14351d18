//! Term normalization, vocabulary entries and the prefix index shared by all
//! suggesters.
//!
//! The index keeps its entries sorted by normalized form, so every prefix maps
//! to one contiguous slice. Alphabetical lookups read the head of that slice
//! directly. Frequency-ordered lookups use a sparse table over the global
//! frequency rank and extract the best `limit` entries of the slice in
//! `O(limit · log limit)` regardless of how many entries match.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::LineError;

/// Number of suggestions shown when the caller does not ask for a limit.
pub const DEFAULT_LIMIT: usize = 10;

/// Matching-form normalizer.
///
/// Applies canonical composition, lower-casing and whitespace collapsing.
/// Diacritic folding (umlauts to base letters, `ß` to `ss`) is off unless
/// requested.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalizer {
    pub fold_diacritics: bool,
}

impl Normalizer {
    pub fn folding() -> Self {
        Normalizer {
            fold_diacritics: true,
        }
    }

    pub fn normalize(&self, raw: &str) -> String {
        let lowered = raw.nfc().collect::<String>().to_lowercase();
        let recomposed: String = if self.fold_diacritics {
            let mut stripped = String::with_capacity(lowered.len());
            for c in lowered.nfd().filter(|c| !is_combining_mark(*c)) {
                match c {
                    'ß' => stripped.push_str("ss"),
                    other => stripped.push(other),
                }
            }
            stripped.nfc().collect()
        } else {
            lowered.nfc().collect()
        };

        let mut out = String::with_capacity(recomposed.len());
        for word in recomposed.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(word);
        }
        out
    }
}

/// Normalizes with the default (non-folding) rules.
pub fn normalize(raw: &str) -> String {
    Normalizer::default().normalize(raw)
}

/// A display string together with its matching form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    display: String,
    normalized: String,
}

impl Term {
    pub fn new(display: impl Into<String>) -> Self {
        Self::with_normalizer(display, &Normalizer::default())
    }

    pub fn with_normalizer(display: impl Into<String>, normalizer: &Normalizer) -> Self {
        let display = display.into();
        let normalized = normalizer.normalize(&display);
        Term {
            display,
            normalized,
        }
    }

    pub fn display(&self) -> &str {
        &self.display
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    pub fn is_blank(&self) -> bool {
        self.normalized.is_empty()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display)
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    Descriptor,
    NonDescriptor,
    #[default]
    FreeUserTerm,
    MappedTerm,
}

impl FromStr for EntryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "descriptor" | "d" => Ok(EntryKind::Descriptor),
            "non-descriptor" | "nd" => Ok(EntryKind::NonDescriptor),
            "free-user-term" | "user" => Ok(EntryKind::FreeUserTerm),
            "mapped-term" | "mapped" => Ok(EntryKind::MappedTerm),
            other => Err(format!("unknown entry kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyEntry {
    pub term: Term,
    /// Usage count; `None` for vocabularies that are only ever shown alphabetically.
    pub frequency: Option<u64>,
    pub kind: EntryKind,
}

impl VocabularyEntry {
    pub fn new(display: &str, kind: EntryKind) -> Self {
        VocabularyEntry {
            term: Term::new(display),
            frequency: None,
            kind,
        }
    }

    pub fn with_frequency(display: &str, frequency: u64) -> Self {
        VocabularyEntry {
            term: Term::new(display),
            frequency: Some(frequency),
            kind: EntryKind::FreeUserTerm,
        }
    }

    pub fn normalized(&self) -> &str {
        self.term.normalized()
    }

    fn frequency_key(&self) -> u64 {
        self.frequency.unwrap_or(0)
    }
}

/// Result ordering for a prefix lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOrder {
    /// Ascending on the normalized form (code-point order).
    Alphabetical,
    /// Frequency descending, ties broken alphabetically.
    FrequencyDesc,
}

impl RankOrder {
    pub fn compare(self, a: &VocabularyEntry, b: &VocabularyEntry) -> Ordering {
        match self {
            RankOrder::Alphabetical => a.normalized().cmp(b.normalized()),
            RankOrder::FrequencyDesc => b
                .frequency_key()
                .cmp(&a.frequency_key())
                .then_with(|| a.normalized().cmp(b.normalized())),
        }
    }
}

/// Immutable prefix index over a vocabulary.
///
/// Serializes as its entry list; lookup tables are rebuilt on load.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "IndexData", into = "IndexData")]
pub struct PrefixIndex {
    entries: Vec<VocabularyEntry>,
    normalizer: Normalizer,
    /// Position of each entry in global frequency order (0 is best).
    freq_rank: Vec<u32>,
    /// `sparse[j][i]` is the entry with the best frequency rank in `i..i + 2^j`.
    sparse: Vec<Vec<u32>>,
}

impl PrefixIndex {
    /// Builds an index. Entries sharing a normalized form are merged, keeping
    /// the first display form and kind together with the highest frequency.
    /// Entries whose normalized form is empty are dropped.
    pub fn build(entries: impl IntoIterator<Item = VocabularyEntry>) -> Self {
        Self::build_with(entries, Normalizer::default())
    }

    pub fn build_with(entries: impl IntoIterator<Item = VocabularyEntry>, normalizer: Normalizer) -> Self {
        let mut merged: Vec<VocabularyEntry> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for mut entry in entries {
            if normalizer.fold_diacritics {
                entry.term = Term::with_normalizer(std::mem::take(&mut entry.term.display), &normalizer);
            }
            if entry.term.is_blank() {
                continue;
            }
            match seen.entry(entry.term.normalized.clone()) {
                Entry::Occupied(slot) => {
                    let kept = &mut merged[*slot.get()];
                    kept.frequency = match (kept.frequency, entry.frequency) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        (a, b) => a.or(b),
                    };
                }
                Entry::Vacant(slot) => {
                    slot.insert(merged.len());
                    merged.push(entry);
                }
            }
        }
        merged.sort_by(|a, b| a.normalized().cmp(b.normalized()));

        let mut by_freq: Vec<u32> = (0..merged.len() as u32).collect();
        by_freq.sort_by(|&a, &b| RankOrder::FrequencyDesc.compare(&merged[a as usize], &merged[b as usize]));
        let mut freq_rank = vec![0u32; merged.len()];
        for (rank, &idx) in by_freq.iter().enumerate() {
            freq_rank[idx as usize] = rank as u32;
        }

        let sparse = build_sparse_table(&freq_rank);
        PrefixIndex {
            entries: merged,
            normalizer,
            freq_rank,
            sparse,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabularyEntry] {
        &self.entries
    }

    pub fn normalizer(&self) -> Normalizer {
        self.normalizer
    }

    /// Exact lookup on the normalized form.
    pub fn get(&self, term: &str) -> Option<&VocabularyEntry> {
        let key = self.normalizer.normalize(term);
        self.entries
            .binary_search_by(|e| e.normalized().cmp(key.as_str()))
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Index range of all entries whose normalized form starts with the
    /// already-normalized `key`.
    fn range_of(&self, key: &str) -> Range<usize> {
        let start = self.entries.partition_point(|e| e.normalized() < key);
        let len = self.entries[start..].partition_point(|e| e.normalized().starts_with(key));
        start..start + len
    }

    /// All entries matching `prefix`, in alphabetical order.
    pub fn matching(&self, prefix: &str) -> &[VocabularyEntry] {
        let key = self.normalizer.normalize(prefix);
        &self.entries[self.range_of(&key)]
    }

    /// At most `limit` entries whose normalized form starts with
    /// `normalize(prefix)`, ordered by `order`.
    pub fn lookup(&self, prefix: &str, limit: usize, order: RankOrder) -> Vec<&VocabularyEntry> {
        let key = self.normalizer.normalize(prefix);
        let range = self.range_of(&key);
        match order {
            RankOrder::Alphabetical => self.entries[range].iter().take(limit).collect(),
            RankOrder::FrequencyDesc => self
                .top_by_frequency(range, limit)
                .into_iter()
                .map(|i| &self.entries[i])
                .collect(),
        }
    }

    /// Lookup with an arbitrary comparator. Sorts the whole matching slice,
    /// so prefer [`PrefixIndex::lookup`] for the built-in orders.
    pub fn lookup_by<F>(&self, prefix: &str, limit: usize, mut compare: F) -> Vec<&VocabularyEntry>
    where
        F: FnMut(&VocabularyEntry, &VocabularyEntry) -> Ordering,
    {
        let mut hits: Vec<&VocabularyEntry> = self.matching(prefix).iter().collect();
        hits.sort_by(|a, b| compare(a, b));
        hits.truncate(limit);
        hits
    }

    fn better(&self, a: u32, b: u32) -> u32 {
        if self.freq_rank[a as usize] <= self.freq_rank[b as usize] {
            a
        } else {
            b
        }
    }

    /// Best-ranked entry in `lo..hi` (non-empty).
    fn range_best(&self, lo: usize, hi: usize) -> u32 {
        let level = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        let row = &self.sparse[level];
        self.better(row[lo], row[hi - (1 << level)])
    }

    fn top_by_frequency(&self, range: Range<usize>, limit: usize) -> Vec<usize> {
        // Min-heap on frequency rank; each item owns a disjoint sub-range.
        let mut out = Vec::with_capacity(limit.min(range.len()));
        let mut heap = BinaryHeap::new();
        if !range.is_empty() {
            let best = self.range_best(range.start, range.end);
            heap.push(std::cmp::Reverse((self.freq_rank[best as usize], best, range.start, range.end)));
        }
        while out.len() < limit {
            let Some(std::cmp::Reverse((_, idx, lo, hi))) = heap.pop() else {
                break;
            };
            let idx = idx as usize;
            out.push(idx);
            for (a, b) in [(lo, idx), (idx + 1, hi)] {
                if a < b {
                    let best = self.range_best(a, b);
                    heap.push(std::cmp::Reverse((self.freq_rank[best as usize], best, a, b)));
                }
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct IndexData {
    normalizer: Normalizer,
    entries: Vec<VocabularyEntry>,
}

impl From<IndexData> for PrefixIndex {
    fn from(data: IndexData) -> Self {
        PrefixIndex::build_with(data.entries, data.normalizer)
    }
}

impl From<PrefixIndex> for IndexData {
    fn from(index: PrefixIndex) -> Self {
        IndexData {
            normalizer: index.normalizer,
            entries: index.entries,
        }
    }
}

fn build_sparse_table(rank: &[u32]) -> Vec<Vec<u32>> {
    let n = rank.len();
    if n == 0 {
        return Vec::new();
    }
    let pick = |a: u32, b: u32| if rank[a as usize] <= rank[b as usize] { a } else { b };
    let mut table: Vec<Vec<u32>> = vec![(0..n as u32).collect()];
    let mut width = 1;
    while width * 2 <= n {
        let prev = table.last().expect("level 0 present");
        let row: Vec<u32> = (0..=n - width * 2).map(|i| pick(prev[i], prev[i + width])).collect();
        table.push(row);
        width *= 2;
    }
    table
}

/// Reads the tab-separated vocabulary format:
/// `display_term [TAB frequency [TAB kind]]`, `#` comments, blank lines skipped.
pub fn parse_vocabulary<R: BufRead>(reader: R) -> Result<Vec<VocabularyEntry>, LineError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| LineError::new(line_no, e.to_string()))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let display = fields.next().unwrap_or_default();
        if display.trim().is_empty() {
            return Err(LineError::new(line_no, "empty term"));
        }
        let frequency = match fields.next().map(str::trim) {
            None | Some("") => None,
            Some(raw) => Some(
                raw.parse::<u64>()
                    .map_err(|_| LineError::new(line_no, format!("bad frequency {raw:?}")))?,
            ),
        };
        let kind = match fields.next().map(str::trim) {
            None | Some("") => EntryKind::default(),
            Some(raw) => raw.parse().map_err(|e: String| LineError::new(line_no, e))?,
        };
        if fields.next().is_some() {
            return Err(LineError::new(line_no, "too many fields"));
        }
        out.push(VocabularyEntry {
            term: Term::new(display.trim()),
            frequency,
            kind,
        });
    }
    Ok(out)
}
