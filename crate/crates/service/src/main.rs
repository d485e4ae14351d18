use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use termsuggest::analytics::{Classifier, Lookback};
use termsuggest_server::commands::{run_build_str, run_ingest, run_report, run_synth, ReportFormat, SynthKind};
use termsuggest_server::config::ServiceConfig;

#[derive(Parser)]
#[command(name = "termsuggest", version, about = "Term suggestion server and log analysis")]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate vocabulary, concordance, thesaurus and corpus files and compile them.
    Ingest,
    /// Build the co-occurrence association table from the ingested corpus.
    BuildStr,
    /// Serve suggestions and accept interaction events.
    Serve,
    /// Key figures, category shares and histograms for an event log.
    Report {
        /// Event log; defaults to the configured log path.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write every table as CSV into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Shared prefix length that counts as a common stem.
        #[arg(long, default_value_t = 4)]
        stem_len: usize,
        /// Look for a repeated completion anywhere earlier in the session.
        #[arg(long)]
        whole_session: bool,
    },
    /// Write a synthetic event log.
    SynthLog {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::FieldStudy)]
        kind: Kind,
        #[arg(long, default_value_t = 2012)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    FieldStudy,
    Categories,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.config {
        Some(path) => ServiceConfig::load(path)?,
        None => ServiceConfig::from_env(),
    };
    match cli.command {
        Command::Ingest => eprint!("{}", run_ingest(&config)?),
        Command::BuildStr => eprint!("{}", run_build_str(&config)?),
        Command::Serve => tokio::runtime::Runtime::new()?.block_on(termsuggest_server::http::serve(config))?,
        Command::Report {
            log,
            format,
            out_dir,
            stem_len,
            whole_session,
        } => {
            let classifier = Classifier {
                stem_len,
                lookback: if whole_session { Lookback::WholeSession } else { Lookback::PreviousSelection },
            };
            let format = match format {
                Format::Text => ReportFormat::Text,
                Format::Csv => ReportFormat::Csv,
            };
            let log = log.unwrap_or(config.log_path);
            let report = run_report(&log, &classifier, format, out_dir.as_deref())?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.text);
        }
        Command::SynthLog { out, kind, seed } => {
            let kind = match kind {
                Kind::FieldStudy => SynthKind::FieldStudy,
                Kind::Categories => SynthKind::Categories,
            };
            let n = run_synth(kind, seed, &out)?;
            eprintln!("wrote {n} records to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
