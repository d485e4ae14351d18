use std::fmt;
use std::io::Read;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combined::Section;
use crate::error::LineError;

/// The four suggestion services a visitor can be exposed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ServiceType {
    #[serde(rename = "UST")]
    UserSearchTerms,
    #[serde(rename = "HTS")]
    Concordance,
    #[serde(rename = "TS")]
    Thesaurus,
    #[serde(rename = "CTS")]
    Combined,
}

impl ServiceType {
    pub const ALL: [ServiceType; 4] = [
        ServiceType::UserSearchTerms,
        ServiceType::Concordance,
        ServiceType::Thesaurus,
        ServiceType::Combined,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ServiceType::UserSearchTerms => "UST",
            ServiceType::Concordance => "HTS",
            ServiceType::Thesaurus => "TS",
            ServiceType::Combined => "CTS",
        }
    }
}

impl fmt::Display for ServiceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ServiceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ServiceType::ALL
            .into_iter()
            .find(|t| t.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown service {s:?} (expected UST, HTS, TS or CTS)"))
    }
}

/// A suggestion picked from the list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionEvent {
    pub entered_term: String,
    pub chosen_term: String,
    pub position: usize,
    #[serde(default)]
    pub section: Section,
    pub service_type: ServiceType,
    pub timestamp: DateTime<Utc>,
    pub session_id: String,
}

/// A submitted search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchEvent {
    pub submitted_term: String,
    /// Service active when the search was submitted, if the logger knew it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_type: Option<ServiceType>,
    pub timestamp: DateTime<Utc>,
    pub session_id: String,
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogRecord {
    Selection(SelectionEvent),
    Search(SearchEvent),
}

/// Field-level validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid fields: {}", .problems.iter().map(|(f, m)| format!("{f} ({m})")).collect::<Vec<_>>().join(", "))]
pub struct ValidationError {
    pub problems: Vec<(&'static str, String)>,
}

impl ValidationError {
    pub fn fields(&self) -> Vec<&'static str> {
        self.problems.iter().map(|(f, _)| *f).collect()
    }
}

fn check_session(id: &str, problems: &mut Vec<(&'static str, String)>) {
    if id.trim().is_empty() {
        problems.push(("session_id", "must not be empty".into()));
    } else if id.len() > 128 || id.chars().any(|c| c.is_whitespace() || c.is_control()) {
        problems.push(("session_id", "must be at most 128 characters without whitespace".into()));
    }
}

fn finish(problems: Vec<(&'static str, String)>) -> Result<(), ValidationError> {
    if problems.is_empty() {
        Ok(())
    } else {
        Err(ValidationError { problems })
    }
}

impl SelectionEvent {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut problems = Vec::new();
        if self.position == 0 {
            problems.push(("position", "must be at least 1".into()));
        }
        if self.chosen_term.trim().is_empty() {
            problems.push(("chosen_term", "must not be empty".into()));
        }
        if self.section == Section::Alternative && self.service_type != ServiceType::Combined {
            problems.push(("section", "alternative section only exists for CTS".into()));
        }
        check_session(&self.session_id, &mut problems);
        finish(problems)
    }
}

impl SearchEvent {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut problems = Vec::new();
        check_session(&self.session_id, &mut problems);
        finish(problems)
    }
}

impl LogRecord {
    pub fn timestamp(&self) -> DateTime<Utc> {
        match self {
            LogRecord::Selection(e) => e.timestamp,
            LogRecord::Search(e) => e.timestamp,
        }
    }

    pub fn session_id(&self) -> &str {
        match self {
            LogRecord::Selection(e) => &e.session_id,
            LogRecord::Search(e) => &e.session_id,
        }
    }

    pub fn service_type(&self) -> Option<ServiceType> {
        match self {
            LogRecord::Selection(e) => Some(e.service_type),
            LogRecord::Search(e) => e.service_type,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        match self {
            LogRecord::Selection(e) => e.validate(),
            LogRecord::Search(e) => e.validate(),
        }
    }

    pub fn as_selection(&self) -> Option<&SelectionEvent> {
        match self {
            LogRecord::Selection(e) => Some(e),
            LogRecord::Search(_) => None,
        }
    }

    /// The record as one log line, newline included.
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("log records always serialize");
        line.push('\n');
        line
    }
}

/// Parses and validates one log line.
pub fn parse_record(line: &str) -> Result<LogRecord, String> {
    let record: LogRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogContents {
    pub records: Vec<LogRecord>,
    /// Set when the file ends in an incomplete record, which is skipped.
    pub trailing_garbage: Option<String>,
}

/// Reads an event log.
///
/// Every newline-terminated line must be a valid record. An unterminated
/// final line that does not parse is treated as a record cut off by a crash:
/// it is skipped and reported in `trailing_garbage`.
pub fn read_log<R: Read>(mut reader: R) -> Result<LogContents, LineError> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| LineError::new(0, e.to_string()))?;
    let mut contents = LogContents::default();
    let mut pieces = bytes.split(|&b| b == b'\n').enumerate().peekable();
    while let Some((i, raw)) = pieces.next() {
        let line_no = i + 1;
        let is_tail = pieces.peek().is_none();
        if raw.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let parsed = std::str::from_utf8(raw)
            .map_err(|e| e.to_string())
            .and_then(parse_record);
        match parsed {
            Ok(record) => contents.records.push(record),
            Err(msg) if is_tail => {
                contents.trailing_garbage = Some(format!("line {line_no}: incomplete record skipped ({msg})"));
            }
            Err(msg) => return Err(LineError::new(line_no, msg)),
        }
    }
    Ok(contents)
}
