use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use termsuggest::analytics::metrics::{letters_histogram_csv, render_metrics_csv, render_metrics_text};
use termsuggest::analytics::synthetic::{category_log, field_study_log};
use termsuggest::analytics::{
    letters_histogram, metrics_by_service, pattern_report, position_histogram, read_log, Classifier, LogRecord,
    ServiceType,
};
use termsuggest::recommender::{build_association_table, AssociationParams, AssociationTable};

use crate::bundle::{ingest, Bundle};
use crate::config::ServiceConfig;

/// Compiles the source files into the bundle. Returns a short summary.
pub fn run_ingest(config: &ServiceConfig) -> anyhow::Result<String> {
    let ingested = ingest(config)?;
    let b = &ingested.bundle;
    b.save(&config.bundle_path)?;
    let mut out = format!(
        "wrote {}: {} user terms, {} mappings, {} descriptors, {} documents\n",
        config.bundle_path.display(),
        b.user_terms.index().len(),
        b.concordance.mappings().len(),
        b.thesaurus.descriptor_index().len(),
        b.corpus.len(),
    );
    if !ingested.violations.is_empty() {
        let _ = writeln!(out, "warning: {} controlled terms are not thesaurus descriptors", ingested.violations.len());
        for v in ingested.violations.iter().take(10) {
            let _ = writeln!(out, "  document {}: {:?}", v.document_id, v.term);
        }
    }
    Ok(out)
}

/// Builds the association table from the ingested corpus.
pub fn run_build_str(config: &ServiceConfig) -> anyhow::Result<String> {
    let bundle = Bundle::load(&config.bundle_path).context("run ingest first")?;
    let params = AssociationParams {
        min_count: config.str_min_count,
        top_k: config.str_top_k,
    };
    let mut table = build_association_table(&bundle.corpus, params)?;
    table.set_built_at(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    write_table(&table, &config.str_path)?;
    Ok(format!(
        "wrote {}: {} free terms from {} documents\n",
        config.str_path.display(),
        table.len(),
        table.meta().corpus_size
    ))
}

fn write_table(table: &AssociationTable, path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    let mut w = BufWriter::new(File::create(&tmp)?);
    table.write_json(&mut w)?;
    w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

/// Output of a report run: the printable report, any CSV files to write,
/// and warnings for stderr.
pub struct Report {
    pub text: String,
    pub files: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

pub fn build_report(records: &[LogRecord], classifier: &Classifier, format: ReportFormat) -> Report {
    let metrics = metrics_by_service(records);
    let patterns = pattern_report(&classifier.classify_log(records));
    let mut files = BTreeMap::new();
    files.insert("metrics.csv".to_string(), render_metrics_csv(&metrics));
    files.insert("categories.csv".to_string(), patterns.render_csv());

    let mut histograms = String::new();
    for service in ServiceType::ALL {
        let sel: Vec<_> = records
            .iter()
            .filter_map(LogRecord::as_selection)
            .filter(|e| e.service_type == service)
            .collect();
        if sel.is_empty() {
            continue;
        }
        let pos = position_histogram(sel.iter().copied()).to_csv();
        let letters = letters_histogram_csv(&letters_histogram(sel.iter().copied()));
        let _ = write!(histograms, "\nSelection position, {service}\n{pos}\nLetters entered, {service}\n{letters}");
        files.insert(format!("positions_{service}.csv"), pos);
        files.insert(format!("letters_{service}.csv"), letters);
    }

    let text = match format {
        ReportFormat::Text => format!(
            "Key figures\n{}\nCategories (% of selections per service)\n{}{histograms}",
            render_metrics_text(&metrics),
            patterns.render_text(),
        ),
        ReportFormat::Csv => format!("{}\n{}", files["metrics.csv"], files["categories.csv"]),
    };
    Report {
        text,
        files,
        warnings: Vec::new(),
    }
}

pub fn run_report(log_path: &Path, classifier: &Classifier, format: ReportFormat, out_dir: Option<&Path>) -> anyhow::Result<Report> {
    let file = File::open(log_path).with_context(|| format!("opening {}", log_path.display()))?;
    let contents = read_log(BufReader::new(file)).with_context(|| log_path.display().to_string())?;
    let mut report = build_report(&contents.records, classifier, format);
    if let Some(w) = contents.trailing_garbage {
        report.warnings.push(format!("{}: {w}", log_path.display()));
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &report.files {
            std::fs::write(dir.join(name), body)?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Four 1000-user cohorts with the field-study counts.
    FieldStudy,
    /// 10,000 labelled selections per service with known category shares.
    Categories,
}

pub fn run_synth(kind: SynthKind, seed: u64, out: &Path) -> anyhow::Result<usize> {
    let records = match kind {
        SynthKind::FieldStudy => field_study_log(seed),
        SynthKind::Categories => category_log(),
    };
    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
    for r in &records {
        w.write_all(r.to_line().as_bytes())?;
    }
    w.flush()?;
    Ok(records.len())
}
