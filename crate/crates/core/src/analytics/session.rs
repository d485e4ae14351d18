use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, Utc};

use super::events::LogRecord;

/// Inactivity after which a new session starts.
pub const SESSION_TIMEOUT_SECS: i64 = 7200;

/// Consecutive events of one session id with no gap above the timeout.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: String,
    pub events: Vec<LogRecord>,
}

impl Session {
    pub fn start(&self) -> DateTime<Utc> {
        self.events[0].timestamp()
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.events[self.events.len() - 1].timestamp()
    }
}

/// Groups records by session id and splits each group wherever two
/// consecutive events are more than `timeout` apart.
///
/// Events keep their log order when timestamps tie. Sessions come out
/// ordered by id, then start time.
pub fn sessionize_with(records: &[LogRecord], timeout: Duration) -> Vec<Session> {
    let mut by_id: BTreeMap<&str, Vec<&LogRecord>> = BTreeMap::new();
    for r in records {
        by_id.entry(r.session_id()).or_default().push(r);
    }
    let mut sessions = Vec::new();
    for (id, mut events) in by_id {
        events.sort_by_key(|r| r.timestamp());
        let mut current: Vec<LogRecord> = Vec::new();
        for r in events {
            if let Some(last) = current.last() {
                if r.timestamp() - last.timestamp() > timeout {
                    sessions.push(Session {
                        session_id: id.to_string(),
                        events: std::mem::take(&mut current),
                    });
                }
            }
            current.push(r.clone());
        }
        sessions.push(Session {
            session_id: id.to_string(),
            events: current,
        });
    }
    sessions
}

pub fn sessionize(records: &[LogRecord]) -> Vec<Session> {
    sessionize_with(records, Duration::seconds(SESSION_TIMEOUT_SECS))
}

/// Distinct session ids, the proxy for distinct visitors.
pub fn unique_users<'a>(records: impl IntoIterator<Item = &'a LogRecord>) -> usize {
    records.into_iter().map(LogRecord::session_id).collect::<BTreeSet<_>>().len()
}
