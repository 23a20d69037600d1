//! Per-category BLSTM classifiers: weight files and inference.

pub mod container;
mod generate;
mod lstm;

pub use generate::random_model;
pub use lstm::{lstm_cell_step, sigmoid, LstmParams};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::category::{SoundCategory, Source};
use crate::dsp::MelSpectrogram;
use crate::score::{Probability, ProbabilityScore};
use container::{ArraySpec, BlobBuilder};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("not a weight container (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    VersionUnsupported(u32),
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in array `{0}`")]
    NonFiniteWeight(String),
    #[error("standardization std for band {0} is not positive")]
    NonPositiveStd(usize),
    #[error("model file is for `{found}` but `{expected}` was requested")]
    CategoryMismatch {
        expected: SoundCategory,
        found: SoundCategory,
    },
    #[error("features have {found} mel bands, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature matrix has no frames")]
    NoFrames,
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::BadMagic => "BadMagic",
            ModelError::VersionUnsupported(_) => "VersionUnsupported",
            ModelError::MalformedManifest(_) => "MalformedManifest",
            ModelError::ShapeMismatch(_) => "ShapeMismatch",
            ModelError::NonFiniteWeight(_) => "NonFiniteWeight",
            ModelError::NonPositiveStd(_) => "NonPositiveStd",
            ModelError::CategoryMismatch { .. } => "CategoryMismatch",
            ModelError::DimensionMismatch { .. } => "DimensionMismatch",
            ModelError::NoFrames => "NoFrames",
        }
    }
}

/// Forward and backward hidden-state sequences, each `T` rows of `H`.
pub type HiddenStates = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Manifest JSON of a weight file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelManifest {
    pub format_version: u32,
    pub category: SoundCategory,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub arrays: Vec<ArraySpec>,
}

/// One category's classifier: a single bidirectional LSTM layer, mean
/// pooling over time, and a logistic head.
#[derive(Debug, Clone, PartialEq)]
pub struct BlstmModel {
    category: SoundCategory,
    forward: LstmParams,
    backward: LstmParams,
    /// `2*hidden`, forward half first
    dense_w: Vec<f64>,
    dense_b: f64,
    feat_mean: Vec<f64>,
    feat_std: Vec<f64>,
}

/// Array names in the order they are written.
const ARRAY_NAMES: [&str; 10] = [
    "forward.W",
    "forward.U",
    "forward.b",
    "backward.W",
    "backward.U",
    "backward.b",
    "dense_w",
    "dense_b",
    "feat_mean",
    "feat_std",
];

impl BlstmModel {
    pub fn new(
        category: SoundCategory,
        forward: LstmParams,
        backward: LstmParams,
        dense_w: Vec<f64>,
        dense_b: f64,
        feat_mean: Vec<f64>,
        feat_std: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let (d, hd) = (forward.input_dim(), forward.hidden_dim());
        if backward.input_dim() != d || backward.hidden_dim() != hd {
            return Err(ModelError::ShapeMismatch(format!(
                "backward LSTM is {}x{}, forward is {d}x{hd}",
                backward.input_dim(),
                backward.hidden_dim()
            )));
        }
        for (name, got, want) in [
            ("dense_w", dense_w.len(), 2 * hd),
            ("feat_mean", feat_mean.len(), d),
            ("feat_std", feat_std.len(), d),
        ] {
            if got != want {
                return Err(ModelError::ShapeMismatch(format!(
                    "{name} has {got} entries, expected {want}"
                )));
            }
        }
        let model = BlstmModel {
            category,
            forward,
            backward,
            dense_w,
            dense_b,
            feat_mean,
            feat_std,
        };
        for (name, values) in model.named_arrays() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFiniteWeight(name.to_string()));
            }
        }
        if let Some(band) = model.feat_std.iter().position(|&s| s <= 0.0) {
            return Err(ModelError::NonPositiveStd(band));
        }
        Ok(model)
    }

    /// All-zero weights with identity standardization. Scores exactly 0.5.
    pub fn zeros(category: SoundCategory, input_dim: usize, hidden_dim: usize) -> Self {
        BlstmModel {
            category,
            forward: LstmParams::zeros(input_dim, hidden_dim),
            backward: LstmParams::zeros(input_dim, hidden_dim),
            dense_w: vec![0.0; 2 * hidden_dim],
            dense_b: 0.0,
            feat_mean: vec![0.0; input_dim],
            feat_std: vec![1.0; input_dim],
        }
    }

    pub fn category(&self) -> SoundCategory {
        self.category
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.forward.hidden_dim()
    }

    pub fn forward_params(&self) -> &LstmParams {
        &self.forward
    }

    pub fn backward_params(&self) -> &LstmParams {
        &self.backward
    }

    pub fn dense_w(&self) -> &[f64] {
        &self.dense_w
    }

    pub fn dense_b(&self) -> f64 {
        self.dense_b
    }

    pub fn feat_mean(&self) -> &[f64] {
        &self.feat_mean
    }

    pub fn feat_std(&self) -> &[f64] {
        &self.feat_std
    }

    pub fn parameter_count(&self) -> usize {
        self.named_arrays().iter().map(|(_, v)| v.len()).sum()
    }

    fn named_arrays(&self) -> [(&'static str, &[f64]); 10] {
        [
            (ARRAY_NAMES[0], self.forward.w()),
            (ARRAY_NAMES[1], self.forward.u()),
            (ARRAY_NAMES[2], self.forward.b()),
            (ARRAY_NAMES[3], self.backward.w()),
            (ARRAY_NAMES[4], self.backward.u()),
            (ARRAY_NAMES[5], self.backward.b()),
            (ARRAY_NAMES[6], &self.dense_w),
            (ARRAY_NAMES[7], std::slice::from_ref(&self.dense_b)),
            (ARRAY_NAMES[8], &self.feat_mean),
            (ARRAY_NAMES[9], &self.feat_std),
        ]
    }

    fn expected_shape(name: &str, d: usize, hd: usize) -> Vec<usize> {
        match name {
            "forward.W" | "backward.W" => vec![4 * hd, d],
            "forward.U" | "backward.U" => vec![4 * hd, hd],
            "forward.b" | "backward.b" => vec![4 * hd],
            "dense_w" => vec![2 * hd],
            "dense_b" => vec![1],
            "feat_mean" | "feat_std" => vec![d],
            _ => unreachable!("unknown array {name}"),
        }
    }

    pub fn manifest(&self) -> ModelManifest {
        self.encode().0
    }

    fn encode(&self) -> (ModelManifest, Vec<u8>) {
        let (d, hd) = (self.input_dim(), self.hidden_dim());
        let mut blob = BlobBuilder::default();
        for (name, values) in self.named_arrays() {
            blob.push(name, Self::expected_shape(name, d, hd), values);
        }
        let (arrays, blob) = blob.finish();
        let manifest = ModelManifest {
            format_version: FORMAT_VERSION,
            category: self.category,
            input_dim: d,
            hidden_dim: hd,
            arrays,
        };
        (manifest, blob)
    }

    /// Serializes to the weight container. Values are stored as float32.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (manifest, blob) = self.encode();
        let json = serde_json::to_vec(&manifest).expect("manifest serializes");
        container::join(&json, &blob)
    }

    /// Parses and validates a weight container.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let (json, blob) = container::split(bytes)?;
        // check the version before the full schema so newer files get a
        // precise error
        let raw: serde_json::Value =
            serde_json::from_slice(json).map_err(|e| ModelError::MalformedManifest(e.to_string()))?;
        let version = raw
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| ModelError::MalformedManifest("missing format_version".into()))?;
        if version != FORMAT_VERSION as u64 {
            return Err(ModelError::VersionUnsupported(version.min(u32::MAX as u64) as u32));
        }
        let manifest: ModelManifest =
            serde_json::from_value(raw).map_err(|e| ModelError::MalformedManifest(e.to_string()))?;
        let (d, hd) = (manifest.input_dim, manifest.hidden_dim);
        if d == 0 || hd == 0 {
            return Err(ModelError::ShapeMismatch(format!(
                "input_dim {d} and hidden_dim {hd} must be positive"
            )));
        }

        let mut arrays: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for spec in &manifest.arrays {
            let name = ARRAY_NAMES
                .iter()
                .find(|n| **n == spec.name)
                .ok_or_else(|| ModelError::MalformedManifest(format!("unknown array `{}`", spec.name)))?;
            let want = Self::expected_shape(name, d, hd);
            if spec.shape != want {
                return Err(ModelError::ShapeMismatch(format!(
                    "array `{name}` declared {:?}, hidden_dim {hd} and input_dim {d} require {want:?}",
                    spec.shape
                )));
            }
            let values = container::read_array(blob, spec)?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFiniteWeight(name.to_string()));
            }
            if arrays.insert(name, values).is_some() {
                return Err(ModelError::MalformedManifest(format!("array `{name}` listed twice")));
            }
        }
        let mut take = |name: &str| {
            arrays
                .remove(name)
                .ok_or_else(|| ModelError::MalformedManifest(format!("missing array `{name}`")))
        };
        let forward = LstmParams::new(d, hd, take("forward.W")?, take("forward.U")?, take("forward.b")?)?;
        let backward = LstmParams::new(d, hd, take("backward.W")?, take("backward.U")?, take("backward.b")?)?;
        let dense_w = take("dense_w")?;
        let dense_b = take("dense_b")?[0];
        let feat_mean = take("feat_mean")?;
        let feat_std = take("feat_std")?;
        BlstmModel::new(manifest.category, forward, backward, dense_w, dense_b, feat_mean, feat_std)
    }

    /// Hidden-state sequences of both directions, each in time order.
    pub fn hidden_states(&self, feat: &MelSpectrogram) -> Result<HiddenStates, ModelError> {
        if feat.n_mels() != self.input_dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.input_dim(),
                found: feat.n_mels(),
            });
        }
        if feat.n_frames() == 0 {
            return Err(ModelError::NoFrames);
        }
        let xs: Vec<Vec<f64>> = feat
            .frames()
            .map(|f| {
                f.iter()
                    .zip(&self.feat_mean)
                    .zip(&self.feat_std)
                    .map(|((v, m), s)| (v - m) / s)
                    .collect()
            })
            .collect();
        let fwd = self.forward.run(xs.iter().map(Vec::as_slice));
        let mut bwd = self.backward.run(xs.iter().rev().map(Vec::as_slice));
        bwd.reverse();
        Ok((fwd, bwd))
    }

    /// Mean-pooled forward states followed by mean-pooled backward states.
    pub fn pooled(&self, feat: &MelSpectrogram) -> Result<Vec<f64>, ModelError> {
        let (fwd, bwd) = self.hidden_states(feat)?;
        let t = fwd.len() as f64;
        let mut pooled = vec![0.0; 2 * self.hidden_dim()];
        let (left, right) = pooled.split_at_mut(self.hidden_dim());
        for (half, seq) in [(left, &fwd), (right, &bwd)] {
            for h in seq.iter() {
                half.iter_mut().zip(h).for_each(|(acc, v)| *acc += v);
            }
            half.iter_mut().for_each(|v| *v /= t);
        }
        Ok(pooled)
    }

    /// COVID-19 probability for one recording's features.
    pub fn forward(&self, feat: &MelSpectrogram) -> Result<ProbabilityScore, ModelError> {
        let pooled = self.pooled(feat)?;
        let z = self.dense_b + self.dense_w.iter().zip(&pooled).map(|(w, v)| w * v).sum::<f64>();
        let p = Probability::new(sigmoid(z)).expect("sigmoid of a finite value is a probability");
        Ok(ProbabilityScore::new(Source::Sound(self.category), p))
    }
}

/// Free-function form of [`BlstmModel::from_bytes`].
pub fn load_model(bytes: &[u8]) -> Result<BlstmModel, ModelError> {
    BlstmModel::from_bytes(bytes)
}

/// Free-function form of [`BlstmModel::forward`].
pub fn blstm_forward(feat: &MelSpectrogram, model: &BlstmModel) -> Result<ProbabilityScore, ModelError> {
    model.forward(feat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::DspConfig;

    fn feat(n_mels: usize, data: Vec<f64>) -> MelSpectrogram {
        MelSpectrogram::from_frames(n_mels, data, DspConfig::default()).unwrap()
    }

    #[test]
    fn zero_model_scores_one_half() {
        let m = BlstmModel::zeros(SoundCategory::CoughHeavy, 3, 2);
        let s = m.forward(&feat(3, vec![1.0, -2.0, 0.5, 4.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.value.value(), 0.5);
        assert_eq!(s.source, Source::Sound(SoundCategory::CoughHeavy));
    }

    #[test]
    fn large_bias_saturates() {
        let z = BlstmModel::zeros(SoundCategory::VowelA, 2, 1);
        let m = BlstmModel::new(
            z.category,
            z.forward.clone(),
            z.backward.clone(),
            z.dense_w.clone(),
            20.0,
            z.feat_mean.clone(),
            z.feat_std.clone(),
        )
        .unwrap();
        let s = m.forward(&feat(2, vec![0.3, 0.1])).unwrap();
        assert!(s.value.value() > 0.999_999);
    }

    #[test]
    fn dimension_mismatch() {
        let m = BlstmModel::zeros(SoundCategory::VowelA, 3, 1);
        assert_eq!(
            m.forward(&feat(2, vec![0.0, 0.0])),
            Err(ModelError::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let m = random_model(SoundCategory::CountingFast, 5, 3, 99);
        let bytes = m.to_bytes();
        let back = BlstmModel::from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn wrong_u_length_is_shape_mismatch() {
        let m = random_model(SoundCategory::CoughShallow, 3, 4, 1);
        let (mut manifest, blob) = m.encode();
        let u = manifest.arrays.iter_mut().find(|a| a.name == "forward.U").unwrap();
        u.shape = vec![16, 3];
        let bytes = container::join(&serde_json::to_vec(&manifest).unwrap(), &blob);
        assert!(matches!(BlstmModel::from_bytes(&bytes), Err(ModelError::ShapeMismatch(_))));
    }

    #[test]
    fn truncated_blob_is_shape_mismatch() {
        let bytes = random_model(SoundCategory::CoughShallow, 3, 4, 1).to_bytes();
        assert!(matches!(
            BlstmModel::from_bytes(&bytes[..bytes.len() - 4]),
            Err(ModelError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn nan_in_dense_w() {
        let m = random_model(SoundCategory::VowelE, 2, 2, 3);
        let (manifest, mut blob) = m.encode();
        let spec = manifest.arrays.iter().find(|a| a.name == "dense_w").unwrap();
        blob[spec.offset..spec.offset + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        let bytes = container::join(&serde_json::to_vec(&manifest).unwrap(), &blob);
        assert_eq!(
            BlstmModel::from_bytes(&bytes),
            Err(ModelError::NonFiniteWeight("dense_w".into()))
        );
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = random_model(SoundCategory::VowelO, 2, 1, 3).to_bytes();
        let good = bytes.clone();
        bytes[0] = b'X';
        assert_eq!(BlstmModel::from_bytes(&bytes), Err(ModelError::BadMagic));

        let (json, blob) = container::split(&good).unwrap();
        let text = String::from_utf8(json.to_vec()).unwrap().replace("\"format_version\":1", "\"format_version\":7");
        let bytes = container::join(text.as_bytes(), blob);
        assert_eq!(BlstmModel::from_bytes(&bytes), Err(ModelError::VersionUnsupported(7)));
    }

    #[test]
    fn non_positive_std_rejected() {
        let z = BlstmModel::zeros(SoundCategory::VowelA, 2, 1);
        let r = BlstmModel::new(
            z.category,
            z.forward.clone(),
            z.backward.clone(),
            z.dense_w.clone(),
            0.0,
            z.feat_mean.clone(),
            vec![1.0, 0.0],
        );
        assert_eq!(r, Err(ModelError::NonPositiveStd(1)));
    }

    #[test]
    fn single_frame_is_valid() {
        let m = random_model(SoundCategory::BreathingDeep, 4, 3, 8);
        let s = m.forward(&feat(4, vec![-9.0, -7.5, -12.0, -3.0])).unwrap();
        assert!(s.value.value() > 0.0 && s.value.value() < 1.0);
    }
}
