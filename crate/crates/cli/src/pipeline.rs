//! Offline pipeline stages. Each stage reads files, writes files, and is
//! byte-for-byte reproducible given the same inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use storylink_core::classifier::{
    build_windows, evaluate, held_out, scan_for_missed_stats, train, Evaluation, Hyperparams,
    StatClassifierModel, TrainingReport,
};
use storylink_core::coupler::{couple, CouplerWarning};
use storylink_core::domain::{
    to_canonical_json, CoupledDocument, NarrativeDocument, WMention, SCHEMA_VERSION,
};
use storylink_core::gamedata::{load_game, GameData, ValidationMode};
use storylink_core::grammar::{match_grammar, Grammar};
use storylink_core::lexicon::{match_who, EntityLexicon};
use storylink_core::validation::{validate_coupled_document, ValidationReport};

pub const DEFAULT_THRESHOLD: f64 = 0.8;
pub const MENTIONS_FILE: &str = "mentions.json";
pub const EXTRACT_REPORT_FILE: &str = "extract_report.json";
pub const COUPLED_FILE: &str = "coupled.json";
pub const COUPLE_REPORT_FILE: &str = "couple_report.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("UNREADABLE_FILE: {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("SCHEMA_MISMATCH: {path}: {detail}")]
    SchemaMismatch { path: String, detail: String },
    #[error("VALIDATION_FAILED: {0}")]
    ValidationFailed(ValidationReport),
    #[error("INVALID_THRESHOLD: {0} is not in (0, 1)")]
    InvalidThreshold(f64),
    #[error("SMALL_CORPUS: {0} stories found, at least 2 are needed")]
    SmallCorpus(usize),
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    serde_json::from_str(&read(path)?).map_err(|e| PipelineError::SchemaMismatch {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    let text = to_canonical_json(value)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn check_threshold(threshold: f64) -> Result<f64, PipelineError> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(threshold)
    } else {
        Err(PipelineError::InvalidThreshold(threshold))
    }
}

pub fn load_grammar(path: Option<&Path>) -> Result<Grammar> {
    match path {
        None => Ok(Grammar::basketball()),
        Some(p) => Ok(Grammar::parse(&read(p)?).with_context(|| format!("grammar {}", p.display()))?),
    }
}

/// A story file becomes a document whose id is the file stem.
pub fn load_story(path: &Path) -> Result<NarrativeDocument> {
    let text = read(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let source = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(NarrativeDocument::parse(stem.clone(), stem, source, text))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub file: String,
    #[serde(default)]
    pub title: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub stories: Vec<CorpusEntry>,
}

/// Stories listed in `<dir>/manifest.json`, in manifest order.
pub fn load_corpus(dir: &Path) -> Result<Vec<NarrativeDocument>> {
    let manifest: CorpusManifest = read_json(&dir.join("manifest.json"))?;
    let mut docs = Vec::with_capacity(manifest.stories.len());
    for e in &manifest.stories {
        let text = read(&dir.join(&e.file))?;
        docs.push(NarrativeDocument::parse(&e.id, &e.title, &e.file, text));
    }
    Ok(docs)
}

/// Lexicon, grammar, then classifier mentions for every sentence, in
/// document order. The classifier only looks at tokens that no lexicon or
/// grammar mention covers.
pub fn extract_mentions(
    doc: &NarrativeDocument,
    lex: &EntityLexicon,
    g: &Grammar,
    classifier: Option<(&StatClassifierModel, f64)>,
) -> Vec<WMention> {
    let mut out = Vec::new();
    for s in &doc.sentences {
        let mut found = match_who(s, &doc.raw_text, lex);
        found.extend(match_grammar(s, &doc.raw_text, g));
        if let Some((model, threshold)) = classifier {
            let extra = scan_for_missed_stats(s, &found, &doc.raw_text, &doc.doc_id, model, threshold);
            found.extend(extra);
        }
        found.sort_by_key(|m| (m.span.start, m.span.end));
        out.extend(found);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOutput {
    pub schema_version: String,
    pub document: NarrativeDocument,
    pub mentions: Vec<WMention>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub doc_id: String,
    pub n_sentences: usize,
    pub n_mentions: usize,
    pub by_w_type: BTreeMap<String, usize>,
    pub by_provenance: BTreeMap<String, usize>,
    /// `None` when no model was supplied.
    pub classifier_threshold: Option<f64>,
}

impl ExtractReport {
    pub fn count(&self, w_type: &str) -> usize {
        self.by_w_type.get(w_type).copied().unwrap_or(0)
    }
}

pub fn summarize(doc: &NarrativeDocument, mentions: &[WMention], threshold: Option<f64>) -> ExtractReport {
    let mut by_w_type = BTreeMap::new();
    let mut by_provenance = BTreeMap::new();
    for m in mentions {
        *by_w_type.entry(m.w_type.to_string()).or_insert(0) += 1;
        *by_provenance.entry(m.provenance.to_string()).or_insert(0) += 1;
    }
    ExtractReport {
        doc_id: doc.doc_id.clone(),
        n_sentences: doc.sentences.len(),
        n_mentions: mentions.len(),
        by_w_type,
        by_provenance,
        classifier_threshold: threshold,
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExtractConfig {
    pub story: PathBuf,
    pub lexicon: PathBuf,
    pub grammar: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub threshold: f64,
    pub out: PathBuf,
}

/// Writes `mentions.json` and `extract_report.json` under `out`.
pub fn run_extract(cfg: &ExtractConfig) -> Result<ExtractReport> {
    let threshold = check_threshold(cfg.threshold)?;
    let lex = EntityLexicon::load(&cfg.lexicon)?;
    let g = load_grammar(cfg.grammar.as_deref())?;
    let model = cfg.model.as_deref().map(StatClassifierModel::load).transpose()?;
    let doc = load_story(&cfg.story)?;
    let classifier = model.as_ref().map(|m| (m, threshold));
    let mentions = extract_mentions(&doc, &lex, &g, classifier);
    let report = summarize(&doc, &mentions, classifier.map(|(_, t)| t));
    let output = ExtractionOutput {
        schema_version: SCHEMA_VERSION.to_string(),
        document: doc,
        mentions,
    };
    write_json(&cfg.out.join(MENTIONS_FILE), &output)?;
    write_json(&cfg.out.join(EXTRACT_REPORT_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub corpus: PathBuf,
    pub grammar: Option<PathBuf>,
    pub model: PathBuf,
    pub hyperparams: Hyperparams,
}

pub fn run_train(cfg: &TrainConfig) -> Result<TrainingReport> {
    let corpus = load_corpus(&cfg.corpus)?;
    if corpus.len() < 2 {
        bail!(PipelineError::SmallCorpus(corpus.len()));
    }
    let g = load_grammar(cfg.grammar.as_deref())?;
    let windows = build_windows(&corpus, &g, cfg.hyperparams.seed)?;
    let model = train(&windows, &cfg.hyperparams)?;
    write_json(&cfg.model, &model)?;
    Ok(model.training_report)
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub corpus: PathBuf,
    pub grammar: Option<PathBuf>,
    pub model: PathBuf,
}

/// Re-evaluates a model on the held-out split it was trained with.
pub fn run_eval(cfg: &EvalConfig) -> Result<Evaluation> {
    let model = StatClassifierModel::load(&cfg.model)?;
    let corpus = load_corpus(&cfg.corpus)?;
    let g = load_grammar(cfg.grammar.as_deref())?;
    let seed = model.hyperparams.seed;
    let windows = build_windows(&corpus, &g, seed)?;
    Ok(evaluate(&model, &held_out(&windows, seed))?)
}

#[derive(Debug, Clone)]
pub struct CoupleConfig {
    pub game: PathBuf,
    pub out: PathBuf,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupleReport {
    pub warnings: Vec<CouplerWarning>,
    pub game_validation: ValidationReport,
    pub document_validation: ValidationReport,
}

pub fn load_game_data(path: &Path, strict: bool) -> Result<(GameData, ValidationReport)> {
    let mode = if strict {
        ValidationMode::Strict
    } else {
        ValidationMode::Lenient
    };
    let loaded = load_game(path, mode)?;
    Ok((loaded.data, loaded.report))
}

/// Reads `mentions.json` from `out`, writes `coupled.json` and
/// `couple_report.json` next to it.
pub fn run_couple(cfg: &CoupleConfig) -> Result<(CoupledDocument, CoupleReport)> {
    let extraction: ExtractionOutput = read_json(&cfg.out.join(MENTIONS_FILE))?;
    let (game, game_validation) = load_game_data(&cfg.game, cfg.strict)?;
    let coupling = couple(&extraction.document, &extraction.mentions, &game)?;
    let document_validation = validate_coupled_document(&coupling.document);
    if cfg.strict && !document_validation.is_empty() {
        bail!(PipelineError::ValidationFailed(document_validation));
    }
    let report = CoupleReport {
        warnings: coupling.warnings,
        game_validation,
        document_validation,
    };
    write_json(&cfg.out.join(COUPLED_FILE), &coupling.document)?;
    write_json(&cfg.out.join(COUPLE_REPORT_FILE), &report)?;
    Ok((coupling.document, report))
}

pub fn load_coupled(path: &Path) -> Result<CoupledDocument> {
    Ok(read_json(path)?)
}
