//! End-to-end scoring: WAV bytes and questionnaire answers in, fused
//! probability out.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};

use crate::category::SoundCategory;
use crate::dsp::{
    decode_wav, peak_normalize, resample, AdmissionConfig, AudioClip, DspConfig, DspError, MelSpectrogram,
    SpectrogramExtractor,
};
use crate::fusion::{fuse_at, FusionConfig, FusionError, ScreenResult};
use crate::model::{BlstmModel, ModelError};
use crate::score::ProbabilityScore;
use crate::symptoms::{DecisionTree, SymptomError, SymptomRecord};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Symptom(#[from] SymptomError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("no model loaded for category `{0}`")]
    ModelMissing(SoundCategory),
    #[error("nothing to score: no symptoms and no recordings")]
    NothingToScore,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Dsp(e) => e.code(),
            PipelineError::Model(e) => e.code(),
            PipelineError::Symptom(e) => e.code(),
            PipelineError::Fusion(e) => e.code(),
            PipelineError::ModelMissing(_) => "ModelMissing",
            PipelineError::NothingToScore => "NothingToScore",
            PipelineError::Io { .. } => "Io",
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// A decoded clip that passed the admission gates.
#[derive(Debug, Clone)]
pub struct AdmittedClip {
    pub clip: AudioClip,
    pub rms: f64,
}

/// Decode, admit, resample, peak-normalize, extract.
#[derive(Debug)]
pub struct AudioFrontEnd {
    admission: AdmissionConfig,
    extractor: SpectrogramExtractor,
}

impl AudioFrontEnd {
    pub fn new(dsp: DspConfig, admission: AdmissionConfig) -> Result<Self, DspError> {
        Ok(AudioFrontEnd {
            admission,
            extractor: SpectrogramExtractor::new(dsp)?,
        })
    }

    pub fn dsp_config(&self) -> &DspConfig {
        self.extractor.config()
    }

    pub fn admission(&self) -> &AdmissionConfig {
        &self.admission
    }

    pub fn admit(&self, clip: AudioClip) -> Result<AdmittedClip, DspError> {
        let rms = self.admission.admit(&clip)?;
        Ok(AdmittedClip { clip, rms })
    }

    pub fn admit_wav(&self, bytes: &[u8]) -> Result<AdmittedClip, DspError> {
        self.admit(decode_wav(bytes)?)
    }

    /// Features of an admitted clip.
    pub fn features(&self, clip: &AudioClip) -> Result<MelSpectrogram, DspError> {
        let at_rate = resample(clip, self.extractor.config().target_rate);
        self.extractor.compute(&peak_normalize(&at_rate))
    }
}

/// Category models keyed by category; any subset may be present.
pub type ModelSet = BTreeMap<SoundCategory, Arc<BlstmModel>>;

/// Loads every `<category-id>.rspm` present in `dir`. Categories without a
/// file are simply absent from the set.
pub fn load_model_dir(dir: &Path) -> Result<ModelSet, PipelineError> {
    let mut models = ModelSet::new();
    for category in SoundCategory::ALL {
        let path = dir.join(category.model_file_name());
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
            Err(e) => return Err(PipelineError::io(&path, e)),
        };
        let model = BlstmModel::from_bytes(&bytes)?;
        if model.category() != category {
            return Err(ModelError::CategoryMismatch {
                expected: category,
                found: model.category(),
            }
            .into());
        }
        models.insert(category, Arc::new(model));
    }
    Ok(models)
}

/// Everything needed to turn a session into a [`ScreenResult`]. Immutable;
/// share behind an `Arc`.
#[derive(Debug)]
pub struct Screener {
    front_end: AudioFrontEnd,
    models: ModelSet,
    tree: DecisionTree,
    fusion: FusionConfig,
}

impl Screener {
    pub fn new(
        front_end: AudioFrontEnd,
        models: ModelSet,
        tree: DecisionTree,
        fusion: FusionConfig,
    ) -> Result<Self, PipelineError> {
        let n_mels = front_end.dsp_config().n_mels;
        if let Some(m) = models.values().find(|m| m.input_dim() != n_mels) {
            return Err(ModelError::DimensionMismatch {
                expected: m.input_dim(),
                found: n_mels,
            }
            .into());
        }
        if tree.n_features != crate::symptoms::N_FEATURES {
            return Err(SymptomError::SchemaMismatch {
                expected: crate::symptoms::N_FEATURES,
                found: tree.n_features,
            }
            .into());
        }
        Ok(Screener {
            front_end,
            models,
            tree,
            fusion,
        })
    }

    pub fn front_end(&self) -> &AudioFrontEnd {
        &self.front_end
    }

    pub fn models(&self) -> &ModelSet {
        &self.models
    }

    pub fn fusion(&self) -> &FusionConfig {
        &self.fusion
    }

    pub fn tree(&self) -> &DecisionTree {
        &self.tree
    }

    pub fn score_recording(&self, category: SoundCategory, clip: &AudioClip) -> Result<ProbabilityScore, PipelineError> {
        let model = self
            .models
            .get(&category)
            .ok_or(PipelineError::ModelMissing(category))?;
        let admitted = self.front_end.admit(clip.clone())?;
        let feat = self.front_end.features(&admitted.clip)?;
        Ok(model.forward(&feat)?)
    }

    pub fn score_symptoms(&self, record: &SymptomRecord) -> Result<ProbabilityScore, PipelineError> {
        Ok(self.tree.predict(&record.encode())?)
    }

    /// Scores whatever is present and fuses it.
    pub fn screen(
        &self,
        symptoms: Option<&SymptomRecord>,
        recordings: &[(SoundCategory, AudioClip)],
        at: DateTime<Utc>,
    ) -> Result<ScreenResult, PipelineError> {
        if symptoms.is_none() && recordings.is_empty() {
            return Err(PipelineError::NothingToScore);
        }
        // fail fast before any DSP work
        if let Some((c, _)) = recordings.iter().find(|(c, _)| !self.models.contains_key(c)) {
            return Err(PipelineError::ModelMissing(*c));
        }
        let mut scores = Vec::with_capacity(recordings.len() + 1);
        for (category, clip) in recordings {
            scores.push(self.score_recording(*category, clip)?);
        }
        if let Some(rec) = symptoms {
            scores.push(self.score_symptoms(rec)?);
        }
        Ok(fuse_at(scores, &self.fusion, at)?)
    }
}
