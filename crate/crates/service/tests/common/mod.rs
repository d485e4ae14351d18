#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use termsuggest_server::commands::{run_build_str, run_ingest};
use termsuggest_server::config::ServiceConfig;
use termsuggest_server::eventlog::EventLog;
use termsuggest_server::http::{AppState, Indexes};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Fixture config with all outputs redirected into `dir`.
pub fn config_in(dir: &Path) -> ServiceConfig {
    let mut config = ServiceConfig::load(&fixtures().join("config.toml")).unwrap();
    config.bundle_path = dir.join("indexes.bin");
    config.str_path = dir.join("str.json");
    config.log_path = dir.join("events.jsonl");
    config
}

/// Ingests the fixtures and builds the association table.
pub fn prepared(dir: &Path) -> ServiceConfig {
    let config = config_in(dir);
    run_ingest(&config).unwrap();
    run_build_str(&config).unwrap();
    config
}

pub fn state(config: ServiceConfig) -> Arc<AppState> {
    let indexes = Indexes::load(&config).unwrap();
    let log = EventLog::open(&config.log_path).unwrap();
    Arc::new(AppState::new(config, indexes, log))
}
