use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use termsuggest::analytics::ServiceType;
use termsuggest::combined::CombinedParams;

pub const ENV_LISTEN: &str = "TERMSUGGEST_LISTEN";
pub const ENV_LOG_PATH: &str = "TERMSUGGEST_LOG_PATH";

/// Server and pipeline settings, read from a TOML file.
///
/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    pub active_service: ServiceType,
    /// List length for UST, HTS and TS.
    pub limit: usize,
    pub ts_limit: usize,
    pub alt_limit: usize,
    pub cts_threshold: usize,
    pub user_terms_path: Option<PathBuf>,
    pub concordance_path: Option<PathBuf>,
    pub thesaurus_path: Option<PathBuf>,
    pub corpus_path: Option<PathBuf>,
    pub bundle_path: PathBuf,
    pub str_path: PathBuf,
    pub log_path: PathBuf,
    pub str_min_count: u64,
    pub str_top_k: usize,
    /// Reject log events whose session id was not issued by this server.
    pub require_session: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8080".into(),
            active_service: ServiceType::Combined,
            limit: 10,
            ts_limit: 10,
            alt_limit: 5,
            cts_threshold: 3,
            user_terms_path: None,
            concordance_path: None,
            thesaurus_path: None,
            corpus_path: None,
            bundle_path: "build/indexes.bin".into(),
            str_path: "build/str.json".into(),
            log_path: "logs/events.jsonl".into(),
            str_min_count: 2,
            str_top_k: 50,
            require_session: true,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let config: ServiceConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// Reads `path`, resolves relative paths against its directory, then
    /// applies environment overrides.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config = Self::from_toml(&text).with_context(|| format!("in config {}", path.display()))?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        config.apply_env(|k| std::env::var(k).ok());
        Ok(config)
    }

    /// Defaults with environment overrides, for commands run without a file.
    pub fn from_env() -> Self {
        let mut config = Self::default();
        config.apply_env(|k| std::env::var(k).ok());
        config
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) {
        if let Some(listen) = var(ENV_LISTEN) {
            self.listen = listen;
        }
        if let Some(log) = var(ENV_LOG_PATH) {
            self.log_path = log.into();
        }
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.user_terms_path, &mut self.concordance_path, &mut self.thesaurus_path, &mut self.corpus_path]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.bundle_path);
        fix(&mut self.str_path);
        fix(&mut self.log_path);
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for (name, v) in [("limit", self.limit), ("ts_limit", self.ts_limit), ("cts_threshold", self.cts_threshold)] {
            if v < 1 {
                bail!("{name} must be at least 1");
            }
        }
        if self.str_min_count < 1 || self.str_top_k < 1 {
            bail!("str_min_count and str_top_k must be at least 1");
        }
        Ok(())
    }

    pub fn combined_params(&self) -> CombinedParams {
        CombinedParams {
            ts_limit: self.ts_limit,
            alt_limit: self.alt_limit,
            threshold: self.cts_threshold,
        }
    }
}
