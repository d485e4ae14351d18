use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::events::{LogRecord, SelectionEvent, ServiceType};
use crate::combined::Section;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no users in the reporting window")]
    NoUsers,
}

/// Usage figures for one service over one reporting window.
///
/// Averages are `None` when nothing was selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub unique_users: usize,
    pub search_queries: usize,
    pub selected_recommendations: usize,
    /// Selections per search, in percent; `None` without searches.
    pub share_per_searches: Option<f64>,
    /// Selections per user, in percent. Can exceed 100.
    pub share_per_users: f64,
    pub users_with_selection: usize,
    /// Users that selected at least once, in percent.
    pub share_users_selecting: f64,
    pub avg_position: Option<f64>,
    pub avg_letters_entered: Option<f64>,
    pub avg_word_length_all: Option<f64>,
    /// Average over selections whose chosen term is a single word.
    pub avg_word_length_single: Option<f64>,
}

/// Characters typed before selecting, ignoring surrounding whitespace.
pub fn letters_entered(e: &SelectionEvent) -> usize {
    e.entered_term.trim().chars().count()
}

/// Characters of the chosen term, not counting whitespace.
pub fn word_length(e: &SelectionEvent) -> usize {
    e.chosen_term.chars().filter(|c| !c.is_whitespace()).count()
}

fn is_single_word(e: &SelectionEvent) -> bool {
    e.chosen_term.split_whitespace().count() == 1
}

fn mean(values: impl Iterator<Item = usize>) -> Option<f64> {
    let (sum, n) = values.fold((0usize, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

fn percent(part: usize, whole: usize) -> f64 {
    100.0 * part as f64 / whole as f64
}

pub fn compute_metrics(
    selections: &[&SelectionEvent],
    search_queries: usize,
    unique_users: usize,
) -> Result<MetricsReport, MetricsError> {
    if unique_users == 0 {
        return Err(MetricsError::NoUsers);
    }
    let selected = selections.len();
    let users_with_selection = selections.iter().map(|e| e.session_id.as_str()).collect::<BTreeSet<_>>().len();
    Ok(MetricsReport {
        unique_users,
        search_queries,
        selected_recommendations: selected,
        share_per_searches: (search_queries > 0).then(|| percent(selected, search_queries)),
        share_per_users: percent(selected, unique_users),
        users_with_selection,
        share_users_selecting: percent(users_with_selection, unique_users),
        avg_position: mean(selections.iter().map(|e| e.position)),
        avg_letters_entered: mean(selections.iter().map(|e| letters_entered(e))),
        avg_word_length_all: mean(selections.iter().map(|e| word_length(e))),
        avg_word_length_single: mean(selections.iter().filter(|e| is_single_word(e)).map(|e| word_length(e))),
    })
}

/// Service each record counts towards.
///
/// Selections carry their service. Searches use their own `service_type`
/// when present, otherwise the first service seen under the same session id.
pub fn attribute_services(records: &[LogRecord]) -> Vec<Option<ServiceType>> {
    let mut fallback: HashMap<&str, ServiceType> = HashMap::new();
    for r in records {
        if let Some(s) = r.service_type() {
            fallback.entry(r.session_id()).or_insert(s);
        }
    }
    records
        .iter()
        .map(|r| r.service_type().or_else(|| fallback.get(r.session_id()).copied()))
        .collect()
}

/// Metrics for every service that has at least one attributed event.
pub fn metrics_by_service(records: &[LogRecord]) -> BTreeMap<ServiceType, MetricsReport> {
    #[derive(Default)]
    struct Acc<'a> {
        users: BTreeSet<&'a str>,
        searches: usize,
        selections: Vec<&'a SelectionEvent>,
    }
    let mut acc: BTreeMap<ServiceType, Acc> = BTreeMap::new();
    for (r, service) in records.iter().zip(attribute_services(records)) {
        let Some(service) = service else { continue };
        let a = acc.entry(service).or_default();
        a.users.insert(r.session_id());
        match r {
            LogRecord::Selection(e) => a.selections.push(e),
            LogRecord::Search(_) => a.searches += 1,
        }
    }
    acc.into_iter()
        .filter_map(|(s, a)| {
            compute_metrics(&a.selections, a.searches, a.users.len())
                .ok()
                .map(|m| (s, m))
        })
        .collect()
}

/// Selections at positions 1 to 10, plus everything further down.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionHistogram {
    pub counts: [u64; 10],
    pub overflow: u64,
}

impl PositionHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{c}\n", i + 1));
        }
        out.push_str(&format!(">10,{}\n", self.overflow));
        out
    }
}

pub fn position_histogram<'a>(selections: impl IntoIterator<Item = &'a SelectionEvent>) -> PositionHistogram {
    let mut h = PositionHistogram::default();
    for e in selections {
        match e.position {
            p @ 1..=10 => h.counts[p - 1] += 1,
            _ => h.overflow += 1,
        }
    }
    h
}

/// Selection counts keyed by number of letters entered.
pub fn letters_histogram<'a>(selections: impl IntoIterator<Item = &'a SelectionEvent>) -> BTreeMap<usize, u64> {
    let mut h = BTreeMap::new();
    for e in selections {
        *h.entry(letters_entered(e)).or_insert(0) += 1;
    }
    h
}

pub fn letters_histogram_csv(h: &BTreeMap<usize, u64>) -> String {
    let mut out = String::from("letters,count\n");
    for (k, v) in h {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

/// Selections split by list section, for the combined service.
pub fn section_counts<'a>(selections: impl IntoIterator<Item = &'a SelectionEvent>) -> BTreeMap<Section, u64> {
    let mut h = BTreeMap::new();
    for e in selections {
        *h.entry(e.section).or_insert(0) += 1;
    }
    h
}

const ROWS: [&str; 10] = [
    "Unique users",
    "Search queries",
    "Selected recommendations",
    "Share per search queries",
    "Share per unique users",
    "Users selecting at least once",
    "Average position",
    "Average letters entered",
    "Average word length",
    "Average word length (single terms)",
];

fn cells(m: &MetricsReport, pct: &dyn Fn(f64) -> String, num: &dyn Fn(f64) -> String) -> [String; 10] {
    let opt = |v: Option<f64>, f: &dyn Fn(f64) -> String| v.map(f).unwrap_or_else(|| "n/a".into());
    [
        m.unique_users.to_string(),
        m.search_queries.to_string(),
        m.selected_recommendations.to_string(),
        opt(m.share_per_searches, pct),
        pct(m.share_per_users),
        pct(m.share_users_selecting),
        opt(m.avg_position, num),
        opt(m.avg_letters_entered, num),
        opt(m.avg_word_length_all, num),
        opt(m.avg_word_length_single, num),
    ]
}

/// Plain-text table with one column per service.
pub fn render_metrics_text(reports: &BTreeMap<ServiceType, MetricsReport>) -> String {
    let pct = |v: f64| format!("{v:.2}%");
    let num = |v: f64| format!("{v:.2}");
    let columns: Vec<(ServiceType, [String; 10])> = reports.iter().map(|(s, m)| (*s, cells(m, &pct, &num))).collect();
    let label_w = ROWS.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut out = format!("{:label_w$}", "");
    for (s, _) in &columns {
        out.push_str(&format!("  {:>10}", s.code()));
    }
    out.push('\n');
    for (i, row) in ROWS.iter().enumerate() {
        out.push_str(&format!("{row:label_w$}"));
        for (_, c) in &columns {
            out.push_str(&format!("  {:>10}", c[i]));
        }
        out.push('\n');
    }
    out
}

/// CSV with one row per service and full precision.
pub fn render_metrics_csv(reports: &BTreeMap<ServiceType, MetricsReport>) -> String {
    let mut out = String::from(
        "service,unique_users,search_queries,selected_recommendations,share_per_searches,share_per_users,\
         users_with_selection,share_users_selecting,avg_position,avg_letters_entered,avg_word_length_all,avg_word_length_single\n",
    );
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for (s, m) in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.code(),
            m.unique_users,
            m.search_queries,
            m.selected_recommendations,
            opt(m.share_per_searches),
            m.share_per_users,
            m.users_with_selection,
            m.share_users_selecting,
            opt(m.avg_position),
            opt(m.avg_letters_entered),
            opt(m.avg_word_length_all),
            opt(m.avg_word_length_single),
        ));
    }
    out
}
