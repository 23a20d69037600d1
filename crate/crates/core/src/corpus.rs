//! Offline batch scoring of labeled recording corpora.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::SoundCategory;
use crate::dsp::decode_wav;
use crate::pipeline::{AudioFrontEnd, ModelSet, PipelineError};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("manifest row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::BadRow { .. } => "BadManifestRow",
            CorpusError::Csv(_) => "Csv",
            CorpusError::Pipeline(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub category: SoundCategory,
    pub label: Option<bool>,
    pub subject_id: Option<String>,
}

/// Rows of a corpus listing. CSV with header `path,category[,label][,subject_id]`;
/// labels are `0` or `1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

#[derive(Deserialize)]
struct RawRow {
    path: String,
    category: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    subject_id: Option<String>,
}

fn parse_label(raw: Option<String>) -> Result<Option<bool>, String> {
    match raw.as_deref().map(str::trim) {
        None | Some("") => Ok(None),
        Some("0") => Ok(Some(false)),
        Some("1") => Ok(Some(true)),
        Some(other) => Err(format!("label `{other}` is not 0 or 1")),
    }
}

impl Manifest {
    /// Relative paths are resolved against `base_dir`.
    pub fn from_reader(reader: impl Read, base_dir: &Path) -> Result<Self, CorpusError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (i, raw) in rdr.deserialize::<RawRow>().enumerate() {
            let row = i + 1;
            let raw = raw?;
            let bad = |message: String| CorpusError::BadRow { row, message };
            let category = raw.category.parse().map_err(|e: crate::category::UnknownCategory| bad(e.to_string()))?;
            let label = parse_label(raw.label).map_err(bad)?;
            let path = PathBuf::from(&raw.path);
            rows.push(ManifestRow {
                path: if path.is_absolute() { path } else { base_dir.join(path) },
                category,
                label,
                subject_id: raw.subject_id.filter(|s| !s.is_empty()),
            });
        }
        Ok(Manifest { rows })
    }

    pub fn from_path(path: &Path) -> Result<Self, CorpusError> {
        let file = std::fs::File::open(path)
            .map_err(|e| CorpusError::Pipeline(PipelineError::io(path, e)))?;
        Manifest::from_reader(file, path.parent().unwrap_or(Path::new(".")))
    }
}

/// One scored manifest row. `outcome` is the probability, or the error code
/// of whatever stopped this file from being scored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRow {
    pub path: PathBuf,
    pub category: SoundCategory,
    pub label: Option<bool>,
    pub outcome: Result<f64, String>,
}

fn score_file(row: &ManifestRow, front_end: &AudioFrontEnd, models: &ModelSet) -> Result<f64, String> {
    let model = &models[&row.category];
    let bytes = std::fs::read(&row.path).map_err(|_| "Io".to_string())?;
    let clip = decode_wav(&bytes).map_err(|e| e.code().to_string())?;
    let admitted = front_end.admit(clip).map_err(|e| e.code().to_string())?;
    let feat = front_end.features(&admitted.clip).map_err(|e| e.code().to_string())?;
    model
        .forward(&feat)
        .map(|s| s.value.value())
        .map_err(|e| e.code().to_string())
}

/// Scores every row, in parallel, keeping manifest order. A category with no
/// model fails the whole run up front; per-file problems are reported in
/// that row only.
pub fn score_corpus(
    manifest: &Manifest,
    front_end: &AudioFrontEnd,
    models: &ModelSet,
) -> Result<Vec<ScoredRow>, PipelineError> {
    if let Some(row) = manifest.rows.iter().find(|r| !models.contains_key(&r.category)) {
        return Err(PipelineError::ModelMissing(row.category));
    }
    Ok(manifest
        .rows
        .par_iter()
        .map(|row| ScoredRow {
            path: row.path.clone(),
            category: row.category,
            label: row.label,
            outcome: score_file(row, front_end, models),
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    path: String,
    category: String,
    score: String,
    label: String,
}

/// Writes `path,category,score,label`. Failed rows carry `error:<Code>` in
/// the score column; unlabeled rows leave `label` empty.
pub fn write_scores_csv(rows: &[ScoredRow], out: impl Write) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["path", "category", "score", "label"])?;
    }
    for r in rows {
        w.serialize(CsvRow {
            path: r.path.display().to_string(),
            category: r.category.id().to_string(),
            score: match &r.outcome {
                Ok(s) => s.to_string(),
                Err(code) => format!("error:{code}"),
            },
            label: r.label.map(|l| (l as u8).to_string()).unwrap_or_default(),
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// A labeled score read back from a scores CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScore {
    pub category: Option<SoundCategory>,
    pub label: bool,
    pub score: f64,
}

#[derive(Debug, Default)]
pub struct ScoresTable {
    pub labeled: Vec<LabeledScore>,
    /// rows with an `error:` score or no label
    pub skipped: usize,
}

/// Reads any CSV with `score` and `label` columns (and optionally
/// `category`). Rows whose score is an error marker or whose label is empty
/// are counted as skipped.
pub fn read_scores_csv(reader: impl Read) -> Result<ScoresTable, CorpusError> {
    #[derive(Deserialize)]
    struct Row {
        #[serde(default)]
        category: Option<String>,
        score: String,
        #[serde(default)]
        label: Option<String>,
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut table = ScoresTable::default();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row?;
        let bad = |message: String| CorpusError::BadRow { row: i + 1, message };
        let Some(label) = parse_label(row.label).map_err(bad)? else {
            table.skipped += 1;
            continue;
        };
        if row.score.starts_with("error:") {
            table.skipped += 1;
            continue;
        }
        let score: f64 = row
            .score
            .parse()
            .map_err(|_| bad(format!("score `{}` is not a number", row.score)))?;
        let category = match row.category.as_deref() {
            None | Some("") => None,
            Some(c) => Some(c.parse().map_err(|e: crate::category::UnknownCategory| bad(e.to_string()))?),
        };
        table.labeled.push(LabeledScore { category, label, score });
    }
    Ok(table)
}
