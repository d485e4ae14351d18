//! Deterministic synthetic logs with known aggregate figures.

use chrono::{DateTime, Duration, Utc};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::events::{LogRecord, SearchEvent, SelectionEvent, ServiceType};
use super::patterns::PatternCategory;
use crate::combined::Section;

/// Counts for one service cohort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cohort {
    pub service: ServiceType,
    pub users: usize,
    pub searches: usize,
    pub selections: usize,
    /// Target mean selection position.
    pub avg_position: f64,
}

/// Cohort sizes of the four-service field study.
pub const FIELD_STUDY: [Cohort; 4] = [
    Cohort { service: ServiceType::UserSearchTerms, users: 1000, searches: 3566, selections: 252, avg_position: 2.0 },
    Cohort { service: ServiceType::Concordance, users: 1000, searches: 3572, selections: 104, avg_position: 2.9 },
    Cohort { service: ServiceType::Thesaurus, users: 1000, searches: 4165, selections: 375, avg_position: 2.1 },
    Cohort { service: ServiceType::Combined, users: 1000, searches: 3604, selections: 509, avg_position: 2.1 },
];

const PAIRS: [(&str, &str); 8] = [
    ("acci", "accident"),
    ("soc", "social inequality"),
    ("pover", "poverty"),
    ("migra", "migration"),
    ("educ", "education policy"),
    ("labour mar", "labour market"),
    ("unemp", "unemployment"),
    ("youth", "youth unemployment"),
];

fn epoch() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2012-01-09T08:00:00Z").unwrap().with_timezone(&Utc)
}

/// Positions with a decaying distribution whose sum is `round(mean * n)`.
fn positions(n: usize, mean: f64, rng: &mut StdRng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n)
        .map(|_| {
            let mut k = 1;
            while k < 10 && rng.gen_bool(0.45) {
                k += 1;
            }
            k
        })
        .collect();
    if n == 0 {
        return p;
    }
    let target = (mean * n as f64).round().max(n as f64) as usize;
    let mut sum: usize = p.iter().sum();
    while sum != target {
        let i = rng.gen_range(0..n);
        if sum < target && p[i] < 10 {
            p[i] += 1;
            sum += 1;
        } else if sum > target && p[i] > 1 {
            p[i] -= 1;
            sum -= 1;
        }
    }
    p
}

/// One cohort: every user searches at least `searches / users` times, and
/// selections go to users in turn.
pub fn cohort_log(cohort: &Cohort, seed: u64) -> Vec<LogRecord> {
    let mut rng = StdRng::seed_from_u64(seed);
    let base = epoch() + Duration::days(7 * cohort.service as i64);
    let pos = positions(cohort.selections, cohort.avg_position, &mut rng);
    let mut log = Vec::with_capacity(cohort.searches + cohort.selections);
    for u in 0..cohort.users {
        let id = format!("{}-{u:05}", cohort.service.code().to_lowercase());
        let start = base + Duration::minutes(3 * u as i64);
        let mut t = 0;
        let mut next = || {
            t += 20;
            start + Duration::seconds(t)
        };
        let n_search = cohort.searches / cohort.users + usize::from(u < cohort.searches % cohort.users);
        for j in (u..cohort.selections).step_by(cohort.users) {
            let (entered, chosen) = PAIRS[rng.gen_range(0..PAIRS.len())];
            log.push(LogRecord::Selection(SelectionEvent {
                entered_term: entered.into(),
                chosen_term: chosen.into(),
                position: pos[j],
                section: Section::Main,
                service_type: cohort.service,
                timestamp: next(),
                session_id: id.clone(),
            }));
        }
        for _ in 0..n_search {
            let (_, q) = PAIRS[rng.gen_range(0..PAIRS.len())];
            log.push(LogRecord::Search(SearchEvent {
                submitted_term: q.into(),
                service_type: Some(cohort.service),
                timestamp: next(),
                session_id: id.clone(),
            }));
        }
    }
    log
}

/// All four cohorts of the field study in one log.
pub fn field_study_log(seed: u64) -> Vec<LogRecord> {
    FIELD_STUDY
        .iter()
        .enumerate()
        .flat_map(|(i, cohort)| cohort_log(cohort, seed.wrapping_add(i as u64)))
        .collect()
}

/// An (entered, chosen) pair that classifies to `category` on its own.
///
/// `FullAfterCompletion` needs a preceding completion, so it has no
/// stand-alone example and falls back to `FullEntrySelected`.
pub fn example_pair(category: PatternCategory) -> (&'static str, &'static str) {
    match category {
        PatternCategory::Completion => ("acci", "accident"),
        PatternCategory::FullEntrySelected | PatternCategory::FullAfterCompletion => ("accident", "accident"),
        PatternCategory::Extension => ("accident", "accident analysis"),
        PatternCategory::SecondTermChanged => ("cognitive maps", "cognitive development"),
        PatternCategory::MoreAbstract => ("mother-child clinic", "mother"),
        PatternCategory::StatisticallyNear => ("medicine", "Doctor-patient-relationship"),
        PatternCategory::Uncategorized => ("labour", "employment"),
    }
}

/// Events of one category shown in one section, and how many.
pub type Cell = (PatternCategory, Section, usize);

/// Selections with exactly `count` events per (category, section), each in
/// its own session so no event influences another.
pub fn pattern_log(service: ServiceType, cells: &[Cell]) -> Vec<LogRecord> {
    let mut log = Vec::new();
    for &(category, section, count) in cells {
        let (entered, chosen) = example_pair(category);
        for _ in 0..count {
            let i = log.len();
            log.push(LogRecord::Selection(SelectionEvent {
                entered_term: entered.into(),
                chosen_term: chosen.into(),
                position: 1 + i % 5,
                section,
                service_type: service,
                timestamp: epoch() + Duration::seconds(i as i64),
                session_id: format!("{}-p{i:06}", service.code().to_lowercase()),
            }));
        }
    }
    log
}

/// Category counts per 10,000 selections reproducing the published shares
/// for every service. The remainder is uncategorized.
pub fn category_table() -> Vec<(ServiceType, Vec<Cell>)> {
    use PatternCategory::*;
    use Section::*;
    let fill = |mut cells: Vec<Cell>| {
        let used: usize = cells.iter().map(|c| c.2).sum();
        cells.push((Uncategorized, Main, 10_000 - used));
        cells
    };
    vec![
        (ServiceType::UserSearchTerms, fill(vec![(Completion, Main, 5298), (FullEntrySelected, Main, 992), (Extension, Main, 3611)])),
        (ServiceType::Concordance, fill(vec![(Completion, Main, 5289), (FullEntrySelected, Main, 1634), (Extension, Main, 3077)])),
        (ServiceType::Thesaurus, fill(vec![(Completion, Main, 6427), (FullEntrySelected, Main, 1360), (Extension, Main, 2053)])),
        (
            ServiceType::Combined,
            fill(vec![
                (Completion, Main, 4971),
                (Completion, Alternative, 235),
                (FullEntrySelected, Main, 1375),
                (FullEntrySelected, Alternative, 40),
                (Extension, Main, 490),
                (Extension, Alternative, 629),
                (StatisticallyNear, Alternative, 2200),
            ]),
        ),
    ]
}

pub fn category_log() -> Vec<LogRecord> {
    category_table()
        .into_iter()
        .flat_map(|(service, cells)| pattern_log(service, &cells))
        .collect()
}
