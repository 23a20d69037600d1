use serde::{Deserialize, Serialize};

use super::DspError;
use crate::category::SoundCategory;

/// Mono PCM audio with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
    pub category: Option<SoundCategory>,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, DspError> {
        if samples.is_empty() {
            return Err(DspError::EmptyAudio);
        }
        if sample_rate == 0 {
            return Err(DspError::MalformedContainer("sample rate is zero".into()));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(DspError::MalformedContainer(format!(
                "sample {bad} outside [-1, 1]"
            )));
        }
        Ok(AudioClip {
            samples,
            sample_rate,
            category: None,
        })
    }

    pub fn with_category(mut self, category: SoundCategory) -> Self {
        self.category = Some(category);
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Builds a clip from samples already known to satisfy the invariants.
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: u32, category: Option<SoundCategory>) -> Self {
        debug_assert!(!samples.is_empty());
        AudioClip {
            samples,
            sample_rate,
            category,
        }
    }
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

/// True when the clip is too quiet to be usable.
pub fn silence_check(clip: &AudioClip, rms_threshold: f64) -> bool {
    rms(clip.samples()) < rms_threshold
}

/// Scales the clip so that its peak magnitude is exactly 1. Silent clips
/// (all zeros) are returned unchanged.
pub fn peak_normalize(clip: &AudioClip) -> AudioClip {
    let peak = clip.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak == 0.0 {
        return clip.clone();
    }
    let samples = clip
        .samples
        .iter()
        .map(|s| (s / peak).clamp(-1.0, 1.0))
        .collect();
    AudioClip::from_parts(samples, clip.sample_rate, clip.category)
}

/// Gates applied to a decoded clip before it may be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmissionConfig {
    pub min_duration_s: f64,
    pub max_duration_s: f64,
    pub rms_threshold: f64,
}

impl Default for AdmissionConfig {
    fn default() -> Self {
        AdmissionConfig {
            min_duration_s: 1.0,
            max_duration_s: 30.0,
            rms_threshold: 1e-3,
        }
    }
}

impl AdmissionConfig {
    /// Checks duration bounds, then loudness. Returns the clip's RMS.
    pub fn admit(&self, clip: &AudioClip) -> Result<f64, DspError> {
        let duration_s = clip.duration_s();
        if duration_s < self.min_duration_s || duration_s > self.max_duration_s {
            return Err(DspError::TooShortOrLong {
                duration_s,
                min_s: self.min_duration_s,
                max_s: self.max_duration_s,
            });
        }
        let level = rms(clip.samples());
        if level < self.rms_threshold {
            return Err(DspError::SilentClip {
                rms: level,
                threshold: self.rms_threshold,
            });
        }
        Ok(level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine(freq: f64, rate: u32, secs: f64, amp: f64) -> AudioClip {
        let n = (rate as f64 * secs) as usize;
        let s = (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioClip::new(s, rate).unwrap()
    }

    #[test]
    fn rejects_empty_and_out_of_range() {
        assert_eq!(AudioClip::new(vec![], 16000), Err(DspError::EmptyAudio));
        assert!(AudioClip::new(vec![1.5], 16000).is_err());
        assert!(AudioClip::new(vec![f64::NAN], 16000).is_err());
    }

    #[test]
    fn silence_of_zero_clip() {
        let clip = AudioClip::new(vec![0.0; 16000], 16000).unwrap();
        assert!(silence_check(&clip, 1e-3));
    }

    #[test]
    fn full_scale_sine_is_not_silent() {
        let clip = sine(1000.0, 16000, 1.0, 1.0);
        assert!((rms(clip.samples()) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
        assert!(!silence_check(&clip, 0.001));
    }

    #[test]
    fn faint_noise_is_silent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s: Vec<f64> = (0..16000).map(|_| rng.random_range(-1e-4..=1e-4)).collect();
        // uniform on [-a, a] has rms a/sqrt(3)
        let direct = (s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64).sqrt();
        assert!(direct < 1e-4);
        let clip = AudioClip::new(s, 16000).unwrap();
        assert!(silence_check(&clip, 1e-3));
    }

    #[test]
    fn admission_bounds() {
        let gate = AdmissionConfig::default();
        assert!(matches!(
            gate.admit(&sine(440.0, 8000, 0.5, 0.5)),
            Err(DspError::TooShortOrLong { .. })
        ));
        assert!(matches!(
            gate.admit(&sine(440.0, 8000, 31.0, 0.5)),
            Err(DspError::TooShortOrLong { .. })
        ));
        assert!(matches!(
            gate.admit(&AudioClip::new(vec![0.0; 16000], 16000).unwrap()),
            Err(DspError::SilentClip { .. })
        ));
        assert!(gate.admit(&sine(440.0, 8000, 1.0, 0.5)).is_ok());
        assert!(gate.admit(&sine(440.0, 8000, 30.0, 0.5)).is_ok());
    }

    #[test]
    fn peak_normalization() {
        let clip = sine(440.0, 8000, 1.0, 0.25);
        let n = peak_normalize(&clip);
        let peak = n.samples().iter().fold(0.0f64, |m, s| m.max(s.abs()));
        assert!((peak - 1.0).abs() < 1e-15);
        let silent = AudioClip::new(vec![0.0; 10], 8000).unwrap();
        assert_eq!(peak_normalize(&silent), silent);
    }
}
