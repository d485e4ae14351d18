//! HTTP term suggestion server, ingestion pipeline and log reporting.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod eventlog;
pub mod http;
