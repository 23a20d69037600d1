//! Audio front end: WAV decoding, resampling, admission gates and
//! log-mel-spectrogram extraction.

mod clip;
mod mel;
mod resample;
mod spectrogram;
mod wav;

pub use clip::{peak_normalize, rms, silence_check, AdmissionConfig, AudioClip};
pub use mel::{hz_to_mel, mel_filterbank, mel_to_hz, MelFilterbank};
pub use resample::resample;
pub use spectrogram::{compute_mel_spectrogram, power_spectrum, MelSpectrogram, SpectrogramExtractor};
pub use wav::{decode_wav, encode_wav_pcm16};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DspError {
    #[error("malformed WAV container: {0}")]
    MalformedContainer(String),
    #[error("unsupported audio encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("audio contains no samples")]
    EmptyAudio,
    #[error("clip duration {duration_s:.3} s outside [{min_s}, {max_s}] s")]
    TooShortOrLong {
        duration_s: f64,
        min_s: f64,
        max_s: f64,
    },
    #[error("clip is silent (rms {rms:.3e} below {threshold:.3e})")]
    SilentClip { rms: f64, threshold: f64 },
    #[error("clip has {samples} samples, fewer than one {frame}-sample frame")]
    TooShort { samples: usize, frame: usize },
    #[error("mel bands {lower} and {upper} collapse onto FFT bin {bin}")]
    DegenerateBand { lower: usize, upper: usize, bin: usize },
    #[error("invalid DSP configuration: {0}")]
    InvalidConfig(String),
    #[error("clip sample rate {actual} Hz does not match configured {expected} Hz")]
    RateMismatch { expected: u32, actual: u32 },
}

impl DspError {
    /// Stable machine-readable name of the error case.
    pub fn code(&self) -> &'static str {
        match self {
            DspError::MalformedContainer(_) => "MalformedContainer",
            DspError::UnsupportedEncoding(_) => "UnsupportedEncoding",
            DspError::EmptyAudio => "EmptyAudio",
            DspError::TooShortOrLong { .. } => "TooShortOrLong",
            DspError::SilentClip { .. } => "SilentClip",
            DspError::TooShort { .. } => "TooShort",
            DspError::DegenerateBand { .. } => "DegenerateBand",
            DspError::InvalidConfig(_) => "InvalidConfig",
            DspError::RateMismatch { .. } => "RateMismatch",
        }
    }
}

/// Feature-extraction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DspConfig {
    /// Sample rate clips are resampled to, Hz.
    pub target_rate: u32,
    /// Analysis window length, ms.
    pub frame_len_ms: f64,
    /// Hop between consecutive windows, ms.
    pub hop_len_ms: f64,
    pub fft_size: usize,
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
    /// Energies below this are clamped before taking the log.
    pub log_floor: f64,
}

impl Default for DspConfig {
    fn default() -> Self {
        DspConfig {
            target_rate: 16_000,
            frame_len_ms: 25.0,
            hop_len_ms: 10.0,
            fft_size: 512,
            n_mels: 64,
            fmin: 0.0,
            fmax: 8_000.0,
            log_floor: 1e-10,
        }
    }
}

impl DspConfig {
    pub fn frame_samples(&self) -> usize {
        (self.frame_len_ms * self.target_rate as f64 / 1000.0).round() as usize
    }

    pub fn hop_samples(&self) -> usize {
        (self.hop_len_ms * self.target_rate as f64 / 1000.0).round() as usize
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn validate(&self) -> Result<(), DspError> {
        let bad = |m: String| Err(DspError::InvalidConfig(m));
        if self.target_rate == 0 {
            return bad("target_rate must be positive".into());
        }
        let frame = self.frame_samples();
        let hop = self.hop_samples();
        if frame == 0 || hop == 0 {
            return bad(format!("frame ({frame}) and hop ({hop}) must be at least one sample"));
        }
        if !self.fft_size.is_power_of_two() {
            return bad(format!("fft_size {} is not a power of two", self.fft_size));
        }
        if self.fft_size < frame {
            return bad(format!("fft_size {} shorter than frame of {frame} samples", self.fft_size));
        }
        let nyquist = self.target_rate as f64 / 2.0;
        if !(self.fmin >= 0.0 && self.fmin < self.fmax && self.fmax <= nyquist) {
            return bad(format!(
                "need 0 <= fmin < fmax <= {nyquist}, got fmin {} fmax {}",
                self.fmin, self.fmax
            ));
        }
        if self.n_mels == 0 {
            return bad("n_mels must be at least 1".into());
        }
        if !(self.log_floor > 0.0 && self.log_floor.is_finite()) {
            return bad(format!("log_floor {} must be positive", self.log_floor));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = DspConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.frame_samples(), 400);
        assert_eq!(cfg.hop_samples(), 160);
        assert_eq!(cfg.n_bins(), 257);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = DspConfig::default();
        for cfg in [
            DspConfig { fft_size: 500, ..base.clone() },
            DspConfig { fft_size: 256, ..base.clone() },
            DspConfig { fmax: 9000.0, ..base.clone() },
            DspConfig { fmin: 8000.0, ..base.clone() },
            DspConfig { n_mels: 0, ..base.clone() },
            DspConfig { log_floor: 0.0, ..base.clone() },
        ] {
            assert!(matches!(cfg.validate(), Err(DspError::InvalidConfig(_))), "{cfg:?}");
        }
    }
}
