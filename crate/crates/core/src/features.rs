//! Mel-spectrogram dumps in the weight-container layout.

use serde::{Deserialize, Serialize};

use crate::dsp::{DspConfig, MelSpectrogram};
use crate::model::container::{self, ArraySpec, BlobBuilder};
use crate::model::ModelError;

pub const FEATURES_KIND: &str = "mel_spectrogram";
pub const FEATURES_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureManifest {
    pub format_version: u32,
    pub kind: String,
    pub n_frames: usize,
    pub n_mels: usize,
    pub dsp: DspConfig,
    /// a single `mel` array of shape `[n_frames, n_mels]`
    pub arrays: Vec<ArraySpec>,
}

pub fn encode_features(spec: &MelSpectrogram) -> Vec<u8> {
    let mut blob = BlobBuilder::default();
    blob.push("mel", vec![spec.n_frames(), spec.n_mels()], spec.data());
    let (arrays, blob) = blob.finish();
    let manifest = FeatureManifest {
        format_version: FEATURES_VERSION,
        kind: FEATURES_KIND.to_string(),
        n_frames: spec.n_frames(),
        n_mels: spec.n_mels(),
        dsp: spec.config().clone(),
        arrays,
    };
    container::join(&serde_json::to_vec(&manifest).expect("manifest serializes"), &blob)
}

/// Reads a dump back. Values come back at float32 precision.
pub fn decode_features(bytes: &[u8]) -> Result<MelSpectrogram, ModelError> {
    let (json, blob) = container::split(bytes)?;
    let manifest: FeatureManifest =
        serde_json::from_slice(json).map_err(|e| ModelError::MalformedManifest(e.to_string()))?;
    if manifest.format_version != FEATURES_VERSION {
        return Err(ModelError::VersionUnsupported(manifest.format_version));
    }
    if manifest.kind != FEATURES_KIND {
        return Err(ModelError::MalformedManifest(format!("kind `{}` is not {FEATURES_KIND}", manifest.kind)));
    }
    let spec = manifest
        .arrays
        .iter()
        .find(|a| a.name == "mel")
        .ok_or_else(|| ModelError::MalformedManifest("missing array `mel`".into()))?;
    if spec.shape != [manifest.n_frames, manifest.n_mels] {
        return Err(ModelError::ShapeMismatch(format!(
            "mel array {:?} vs declared {}x{}",
            spec.shape, manifest.n_frames, manifest.n_mels
        )));
    }
    let data = container::read_array(blob, spec)?;
    MelSpectrogram::from_frames(manifest.n_mels, data, manifest.dsp)
        .map_err(|_| ModelError::NonFiniteWeight("mel".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let data: Vec<f64> = (0..12).map(|i| -(i as f64) * 0.5).collect();
        let spec = MelSpectrogram::from_frames(4, data, DspConfig::default()).unwrap();
        let bytes = encode_features(&spec);
        assert_eq!(&bytes[..8], b"RSPSCRN1");
        assert_eq!(decode_features(&bytes).unwrap(), spec);
    }
}
