//! Combined term suggestion: thesaurus completions, followed by an
//! "Alternative Search Terms" section drawn from the recommender once the
//! input is long enough.

use serde::{Deserialize, Serialize};

use crate::recommender::AssociationTable;
use crate::suggesters::{number_terms, Source, Suggestion, Thesaurus};
use crate::vocabulary::normalize;

/// Which part of a combined list a suggestion was shown in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    #[default]
    Main,
    Alternative,
}

impl Section {
    pub fn as_str(self) -> &'static str {
        match self {
            Section::Main => "main",
            Section::Alternative => "alternative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinedParams {
    pub ts_limit: usize,
    pub alt_limit: usize,
    /// Inputs of at most this many normalized characters get no alternative section.
    pub threshold: usize,
}

impl Default for CombinedParams {
    fn default() -> Self {
        CombinedParams {
            ts_limit: 10,
            alt_limit: 5,
            threshold: 3,
        }
    }
}

/// A suggestion list split into the thesaurus section and the alternative
/// section. Positions run on from the first section into the second.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SectionedSuggestions {
    pub thesaurus: Vec<Suggestion>,
    pub alternative: Vec<Suggestion>,
}

impl SectionedSuggestions {
    /// A single-section list, as returned by the base services.
    pub fn main_only(suggestions: Vec<Suggestion>) -> Self {
        SectionedSuggestions {
            thesaurus: suggestions,
            alternative: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.thesaurus.len() + self.alternative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All suggestions in display order with their section.
    pub fn iter(&self) -> impl Iterator<Item = (Section, &Suggestion)> {
        self.thesaurus
            .iter()
            .map(|s| (Section::Main, s))
            .chain(self.alternative.iter().map(|s| (Section::Alternative, s)))
    }
}

/// Combined suggestions for `input`.
///
/// The thesaurus section is exactly what [`Thesaurus::suggest`] returns. When
/// the normalized input is longer than `threshold` characters, recommender
/// terms not already in the thesaurus section fill up to `alt_limit` slots
/// below it.
pub fn combined_suggest(
    thesaurus: &Thesaurus,
    table: &AssociationTable,
    input: &str,
    params: &CombinedParams,
) -> SectionedSuggestions {
    let main = thesaurus.suggest(input, params.ts_limit);
    if normalize(input).chars().count() <= params.threshold || params.alt_limit == 0 {
        return SectionedSuggestions::main_only(main);
    }

    // at most |main| candidates can be filtered out
    let candidates = table.recommend(input, params.alt_limit + main.len());
    let alternative = candidates
        .into_iter()
        .map(|(term, _)| term)
        .filter(|t| !main.iter().any(|m| m.term.normalized() == t.normalized()))
        .take(params.alt_limit);
    let first = main.len() + 1;
    SectionedSuggestions {
        alternative: number_terms(alternative, Source::Recommender, first),
        thesaurus: main,
    }
}
