//! Classification of how the chosen term relates to what the user typed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::events::{LogRecord, SelectionEvent, ServiceType};
use super::session::sessionize;
use crate::combined::Section;
use crate::vocabulary::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternCategory {
    #[serde(rename = "C1_completion")]
    Completion,
    #[serde(rename = "C2_full_entry_selected")]
    FullEntrySelected,
    #[serde(rename = "C3_full_after_completion")]
    FullAfterCompletion,
    #[serde(rename = "C4_extension")]
    Extension,
    #[serde(rename = "C5_second_term_changed")]
    SecondTermChanged,
    #[serde(rename = "C6_more_abstract")]
    MoreAbstract,
    #[serde(rename = "C7_statistically_near")]
    StatisticallyNear,
    Uncategorized,
}

impl PatternCategory {
    pub const ALL: [PatternCategory; 8] = [
        PatternCategory::Completion,
        PatternCategory::FullEntrySelected,
        PatternCategory::FullAfterCompletion,
        PatternCategory::Extension,
        PatternCategory::SecondTermChanged,
        PatternCategory::MoreAbstract,
        PatternCategory::StatisticallyNear,
        PatternCategory::Uncategorized,
    ];

    /// Category number 1 to 7; `None` for uncategorized.
    pub fn number(self) -> Option<u8> {
        match self {
            PatternCategory::Uncategorized => None,
            c => Some(c as u8 + 1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PatternCategory::Completion => "term completion",
            PatternCategory::FullEntrySelected => "full entry selected",
            PatternCategory::FullAfterCompletion => "full entry after completion",
            PatternCategory::Extension => "term extension",
            PatternCategory::SecondTermChanged => "second term changed",
            PatternCategory::MoreAbstract => "more abstract term",
            PatternCategory::StatisticallyNear => "statistically near term",
            PatternCategory::Uncategorized => "uncategorized",
        }
    }
}

impl fmt::Display for PatternCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("-"),
        }
    }
}

/// How far back a full-entry selection looks for the completion it repeats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lookback {
    /// Only the selection immediately before, in the same session.
    #[default]
    PreviousSelection,
    /// Any earlier selection in the same session.
    WholeSession,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classifier {
    /// Shared prefix length that counts as a common stem.
    pub stem_len: usize,
    pub lookback: Lookback,
}

impl Default for Classifier {
    fn default() -> Self {
        Classifier {
            stem_len: 4,
            lookback: Lookback::PreviousSelection,
        }
    }
}

fn starts_with_tokens(long: &[&str], short: &[&str]) -> bool {
    long.len() > short.len() && long[..short.len()] == *short
}

impl Classifier {
    /// Category of `event`, given the earlier classified selections of its
    /// session in time order.
    pub fn classify(&self, event: &SelectionEvent, history: &[ClassifiedSelection]) -> PatternCategory {
        use PatternCategory::*;
        let entered = normalize(&event.entered_term);
        let chosen = normalize(&event.chosen_term);
        if chosen.is_empty() {
            return Uncategorized;
        }

        if entered == chosen {
            let completed = |c: &ClassifiedSelection| c.category == Completion && normalize(&c.event.chosen_term) == chosen;
            let repeats = match self.lookback {
                Lookback::PreviousSelection => history.last().is_some_and(completed),
                Lookback::WholeSession => history.iter().any(completed),
            };
            return if repeats { FullAfterCompletion } else { FullEntrySelected };
        }

        let et: Vec<&str> = entered.split(' ').filter(|t| !t.is_empty()).collect();
        let ct: Vec<&str> = chosen.split(' ').collect();

        if !et.is_empty() && chosen.starts_with(&entered) && et.len() <= ct.len() {
            let i = et.len() - 1;
            if ct[i].len() > et[i].len() {
                return Completion;
            }
        }
        if !et.is_empty() && starts_with_tokens(&ct, &et) {
            return Extension;
        }
        let subtokens = |s: &str| -> Vec<String> {
            s.split([' ', '-'])
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect()
        };
        if !et.is_empty() && (starts_with_tokens(&et, &ct) || {
            let (es, cs) = (subtokens(&entered), subtokens(&chosen));
            !cs.is_empty() && es.len() > cs.len() && es[..cs.len()] == cs[..]
        }) {
            return MoreAbstract;
        }
        if et.len() == 2 && ct.len() == 2 && et[0] == ct[0] && et[1] != ct[1] {
            return SecondTermChanged;
        }
        if event.section == Section::Alternative {
            let shared = entered.chars().zip(chosen.chars()).take_while(|(a, b)| a == b).count();
            if shared < self.stem_len {
                return StatisticallyNear;
            }
        }
        Uncategorized
    }

    /// Classifies every selection in the log, session by session.
    pub fn classify_log(&self, records: &[LogRecord]) -> Vec<ClassifiedSelection> {
        let mut out = Vec::new();
        for session in sessionize(records) {
            let start = out.len();
            for r in &session.events {
                if let LogRecord::Selection(e) = r {
                    let category = self.classify(e, &out[start..]);
                    out.push(ClassifiedSelection {
                        event: e.clone(),
                        category,
                    });
                }
            }
        }
        out
    }
}

pub fn classify_pattern(event: &SelectionEvent, history: &[ClassifiedSelection]) -> PatternCategory {
    Classifier::default().classify(event, history)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedSelection {
    pub event: SelectionEvent,
    pub category: PatternCategory,
}

/// Category shares of one service, in percent of its classified selections.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ServicePatterns {
    pub total_events: usize,
    pub counts: BTreeMap<PatternCategory, [usize; 2]>,
}

impl ServicePatterns {
    fn share(&self, count: usize) -> f64 {
        100.0 * count as f64 / self.total_events as f64
    }

    fn cell(&self, c: PatternCategory) -> [usize; 2] {
        self.counts.get(&c).copied().unwrap_or_default()
    }

    /// Share of events in `section` with category `c`, over all events of the service.
    pub fn section_share(&self, c: PatternCategory, section: Section) -> f64 {
        self.share(self.cell(c)[section as usize])
    }

    pub fn share_of(&self, c: PatternCategory) -> f64 {
        let [m, a] = self.cell(c);
        self.share(m + a)
    }
}

/// Per-service category shares. Services without events are absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub services: BTreeMap<ServiceType, ServicePatterns>,
}

pub fn pattern_report(classified: &[ClassifiedSelection]) -> PatternReport {
    let mut report = PatternReport::default();
    for c in classified {
        let s = report.services.entry(c.event.service_type).or_default();
        s.total_events += 1;
        s.counts.entry(c.category).or_default()[c.event.section as usize] += 1;
    }
    report
}

type Column<'a> = (String, Box<dyn Fn(PatternCategory) -> f64 + 'a>);

impl PatternReport {
    /// Column headers and values; CTS gets one column per section plus a total.
    fn columns(&self) -> Vec<Column<'_>> {
        let mut cols: Vec<Column<'_>> = Vec::new();
        for (service, p) in &self.services {
            if *service == ServiceType::Combined {
                cols.push(("CTS main".into(), Box::new(move |c| p.section_share(c, Section::Main))));
                cols.push(("CTS alt".into(), Box::new(move |c| p.section_share(c, Section::Alternative))));
                cols.push(("CTS total".into(), Box::new(move |c| p.share_of(c))));
            } else {
                cols.push((service.code().into(), Box::new(move |c| p.share_of(c))));
            }
        }
        cols
    }

    pub fn render_text(&self) -> String {
        let cols = self.columns();
        let mut out = format!("{:<8}", "Category");
        for (h, _) in &cols {
            out.push_str(&format!("  {h:>10}"));
        }
        out.push('\n');
        for c in PatternCategory::ALL {
            let label = c.number().map_or("none".to_string(), |n| n.to_string());
            out.push_str(&format!("{label:<8}"));
            for (_, f) in &cols {
                out.push_str(&format!("  {:>10}", format!("{:.2}%", f(c))));
            }
            out.push('\n');
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let cols = self.columns();
        let mut out = String::from("category");
        for (h, _) in &cols {
            out.push(',');
            out.push_str(&h.replace(' ', "_"));
        }
        out.push('\n');
        for c in PatternCategory::ALL {
            out.push_str(&c.number().map_or("none".to_string(), |n| n.to_string()));
            for (_, f) in &cols {
                out.push_str(&format!(",{}", f(c)));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{DateTime, Utc};
    use proptest::prelude::*;
    use PatternCategory::*;

    fn event(entered: &str, chosen: &str, section: Section) -> SelectionEvent {
        SelectionEvent {
            entered_term: entered.into(),
            chosen_term: chosen.into(),
            position: 1,
            section,
            service_type: if section == Section::Alternative { ServiceType::Combined } else { ServiceType::Thesaurus },
            timestamp: DateTime::<Utc>::from_timestamp(1_330_000_000, 0).unwrap(),
            session_id: "s".into(),
        }
    }

    fn one(entered: &str, chosen: &str) -> PatternCategory {
        classify_pattern(&event(entered, chosen, Section::Main), &[])
    }

    #[test]
    fn worked_examples() {
        assert_eq!(one("acci", "accident"), Completion);
        assert_eq!(one("accident", "accident"), FullEntrySelected);
        assert_eq!(one("accident", "accident analysis"), Extension);
        assert_eq!(one("cognitive maps", "cognitive development"), SecondTermChanged);
        assert_eq!(one("mother-child clinic", "mother"), MoreAbstract);
        let e = event("medicine", "Doctor-patient-relationship", Section::Alternative);
        assert_eq!(classify_pattern(&e, &[]), StatisticallyNear);
    }

    #[test]
    fn completion_then_full_entry() {
        let first = ClassifiedSelection {
            event: event("acci", "accident", Section::Main),
            category: Completion,
        };
        let second = event("accident", "accident", Section::Main);
        assert_eq!(classify_pattern(&second, std::slice::from_ref(&first)), FullAfterCompletion);

        // an unrelated selection in between breaks the strict look-back only
        let between = ClassifiedSelection {
            event: event("soc", "society", Section::Main),
            category: Completion,
        };
        let history = [first, between];
        assert_eq!(classify_pattern(&second, &history), FullEntrySelected);
        let loose = Classifier {
            lookback: Lookback::WholeSession,
            ..Classifier::default()
        };
        assert_eq!(loose.classify(&second, &history), FullAfterCompletion);
    }

    #[test]
    fn normalization_before_comparison() {
        assert_eq!(one("  Accident ", "accident"), FullEntrySelected);
        assert_eq!(one("ACCIDENT", "Accident Analysis"), Extension);
        assert_eq!(one("accident an", "accident analysis"), Completion);
        assert_eq!(one("social inequality", "social"), MoreAbstract);
    }

    #[test]
    fn fallbacks() {
        assert_eq!(one("", "accident"), Uncategorized);
        assert_eq!(one("labour", "employment"), Uncategorized);
        // shared stem in the alternative section is not "statistically near"
        let e = event("medicine", "medical care", Section::Alternative);
        assert_eq!(classify_pattern(&e, &[]), Uncategorized);
        let strict = Classifier {
            stem_len: 3,
            ..Classifier::default()
        };
        assert_eq!(strict.classify(&e, &[]), Uncategorized);
        let loose = Classifier {
            stem_len: 6,
            ..Classifier::default()
        };
        assert_eq!(loose.classify(&e, &[]), StatisticallyNear);
    }

    #[test]
    fn classify_log_keeps_sessions_apart() {
        let mut a = event("acci", "accident", Section::Main);
        a.session_id = "a".into();
        let mut b = event("accident", "accident", Section::Main);
        b.session_id = "b".into();
        b.timestamp += chrono::Duration::seconds(5);
        let mut c = b.clone();
        c.session_id = "a".into();
        let log: Vec<LogRecord> = [a, b, c].into_iter().map(LogRecord::Selection).collect();
        let cats: Vec<(String, PatternCategory)> = Classifier::default()
            .classify_log(&log)
            .into_iter()
            .map(|c| (c.event.session_id, c.category))
            .collect();
        assert_eq!(
            cats,
            [("a".into(), Completion), ("a".into(), FullAfterCompletion), ("b".into(), FullEntrySelected)]
        );
    }

    #[test]
    fn report_shares() {
        let mut classified = Vec::new();
        for i in 0..100 {
            let category = if i < 64 { Completion } else { Uncategorized };
            classified.push(ClassifiedSelection {
                event: event("x", "y", Section::Main),
                category,
            });
        }
        let r = pattern_report(&classified);
        let ts = &r.services[&ServiceType::Thesaurus];
        assert_eq!(ts.share_of(Completion), 64.0);
        assert!(r.render_text().contains("64.00%"));
        assert!(pattern_report(&[]).services.is_empty());
        assert_eq!(pattern_report(&[]).render_csv(), "category\n1\n2\n3\n4\n5\n6\n7\nnone\n");
    }

    #[test]
    fn cts_sections_add_up() {
        let mk = |section, category| ClassifiedSelection {
            event: event("x", "y", section),
            category,
        };
        let mut classified = vec![mk(Section::Main, Completion); 3];
        classified.push(mk(Section::Alternative, Completion));
        let r = pattern_report(&classified);
        let p = &r.services[&ServiceType::Combined];
        assert_eq!(p.section_share(Completion, Section::Alternative), 100.0);
        assert_eq!(r.services[&ServiceType::Thesaurus].share_of(Completion), 100.0);
        let csv = r.render_csv();
        assert!(csv.starts_with("category,TS,CTS_main,CTS_alt,CTS_total\n1,100,0,100,100\n"), "{csv}");
    }

    proptest! {
        #[test]
        fn classifier_consistency(
            entered in "[ab -]{0,8}",
            chosen in "[ab -]{0,8}",
            alt in any::<bool>(),
        ) {
            let section = if alt { Section::Alternative } else { Section::Main };
            let e = event(&entered, &chosen, section);
            let c = classify_pattern(&e, &[]);
            let (ne, nc) = (normalize(&entered), normalize(&chosen));
            match c {
                FullEntrySelected | FullAfterCompletion => prop_assert_eq!(&ne, &nc),
                Completion => prop_assert!(nc.chars().count() > ne.chars().count() && nc.starts_with(&ne)),
                StatisticallyNear => prop_assert!(alt),
                _ => prop_assert!(ne != nc || nc.is_empty()),
            }
            prop_assert!(PatternCategory::ALL.contains(&c));
        }
    }
}
