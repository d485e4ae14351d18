//! Interaction logs and what can be learned from them: sessions, usage
//! figures per service, and how selected terms relate to the typed input.

pub mod events;
pub mod metrics;
pub mod patterns;
pub mod session;
pub mod synthetic;

pub use events::{parse_record, read_log, LogContents, LogRecord, SearchEvent, SelectionEvent, ServiceType, ValidationError};
pub use metrics::{
    compute_metrics, letters_histogram, metrics_by_service, position_histogram, MetricsError, MetricsReport,
    PositionHistogram,
};
pub use patterns::{classify_pattern, pattern_report, ClassifiedSelection, Classifier, Lookback, PatternCategory, PatternReport};
pub use session::{sessionize, unique_users, Session, SESSION_TIMEOUT_SECS};
