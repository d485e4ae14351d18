//! Compiled vocabularies in one binary file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use termsuggest::recommender::{check_controlled_terms, read_corpus, CorpusViolation, DocumentRecord};
use termsuggest::suggesters::{parse_concordance, parse_thesaurus, CrossConcordance, Thesaurus, UserTerms};
use termsuggest::vocabulary::parse_vocabulary;

use crate::config::ServiceConfig;

const MAGIC: [u8; 4] = *b"TSB1";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoredDocument {
    id: String,
    title: String,
    abstract_text: Option<String>,
    controlled_terms: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StoredBundle {
    user_terms: UserTerms,
    concordance: CrossConcordance,
    thesaurus: Thesaurus,
    corpus: Vec<StoredDocument>,
}

/// Everything `ingest` produces.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub user_terms: UserTerms,
    pub concordance: CrossConcordance,
    pub thesaurus: Thesaurus,
    pub corpus: Vec<DocumentRecord>,
}

/// Result of compiling the source files.
#[derive(Debug)]
pub struct Ingested {
    pub bundle: Bundle,
    /// Corpus documents indexed with terms that are not thesaurus descriptors.
    pub violations: Vec<CorpusViolation>,
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

/// Parses and validates every configured source file. Errors name the file
/// and line.
pub fn ingest(config: &ServiceConfig) -> anyhow::Result<Ingested> {
    let user_terms = match &config.user_terms_path {
        Some(p) => UserTerms::new(parse_vocabulary(open(p)?).with_context(|| p.display().to_string())?),
        None => UserTerms::default(),
    };
    let concordance = match &config.concordance_path {
        Some(p) => parse_concordance(open(p)?).with_context(|| p.display().to_string())?,
        None => CrossConcordance::new(Vec::new())?,
    };
    let thesaurus = match &config.thesaurus_path {
        Some(p) => parse_thesaurus(open(p)?).with_context(|| p.display().to_string())?,
        None => Thesaurus::from_descriptors([]),
    };
    let corpus = match &config.corpus_path {
        Some(p) => read_corpus(open(p)?).with_context(|| p.display().to_string())?,
        None => Vec::new(),
    };
    let violations = if config.thesaurus_path.is_some() {
        check_controlled_terms(&corpus, &thesaurus)
    } else {
        Vec::new()
    };
    Ok(Ingested {
        bundle: Bundle {
            user_terms,
            concordance,
            thesaurus,
            corpus,
        },
        violations,
    })
}

impl Bundle {
    /// Writes to a sibling temp file and renames, so readers never see a
    /// partial bundle.
    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let stored = StoredBundle {
            user_terms: self.user_terms.clone(),
            concordance: self.concordance.clone(),
            thesaurus: self.thesaurus.clone(),
            corpus: self
                .corpus
                .iter()
                .map(|d| StoredDocument {
                    id: d.id.clone(),
                    title: d.title.clone(),
                    abstract_text: d.abstract_text.clone(),
                    controlled_terms: d.controlled_terms.clone(),
                })
                .collect(),
        };
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            w.write_all(&MAGIC)?;
            bincode::serialize_into(&mut w, &stored)?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let mut r = open(path)?;
        let mut magic = [0u8; 4];
        std::io::Read::read_exact(&mut r, &mut magic).with_context(|| format!("reading {}", path.display()))?;
        if magic != MAGIC {
            bail!("{} is not an index bundle", path.display());
        }
        let stored: StoredBundle =
            bincode::deserialize_from(r).with_context(|| format!("decoding {}", path.display()))?;
        Ok(Bundle {
            user_terms: stored.user_terms,
            concordance: stored.concordance,
            thesaurus: stored.thesaurus,
            corpus: stored
                .corpus
                .into_iter()
                .map(|d| DocumentRecord {
                    id: d.id,
                    title: d.title,
                    abstract_text: d.abstract_text,
                    controlled_terms: d.controlled_terms,
                })
                .collect(),
        })
    }
}
