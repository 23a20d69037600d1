use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{mel_filterbank, AudioClip, DspConfig, DspError, MelFilterbank};

/// Log mel-band energies, `n_frames x n_mels`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    n_frames: usize,
    n_mels: usize,
    data: Vec<f64>,
    config: DspConfig,
}

impl MelSpectrogram {
    /// Wraps an existing matrix. Used for features computed elsewhere or
    /// synthesized in tests.
    pub fn from_frames(n_mels: usize, data: Vec<f64>, config: DspConfig) -> Result<Self, DspError> {
        if n_mels == 0 || !data.len().is_multiple_of(n_mels) {
            return Err(DspError::InvalidConfig(format!(
                "{} values do not tile into rows of {n_mels}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(DspError::InvalidConfig("non-finite feature value".into()));
        }
        Ok(MelSpectrogram {
            n_frames: data.len() / n_mels,
            n_mels,
            data,
            config,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_mels..(t + 1) * self.n_mels]
    }

    pub fn frames(&self) -> impl DoubleEndedIterator<Item = &[f64]> + ExactSizeIterator + '_ {
        self.data.chunks_exact(self.n_mels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn config(&self) -> &DspConfig {
        &self.config
    }
}

/// Precomputed window, FFT plan and filterbank for one [`DspConfig`].
/// Immutable once built; share it freely across threads.
pub struct SpectrogramExtractor {
    config: DspConfig,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    bank: MelFilterbank,
}

impl std::fmt::Debug for SpectrogramExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrogramExtractor")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl SpectrogramExtractor {
    pub fn new(config: DspConfig) -> Result<Self, DspError> {
        let bank = mel_filterbank(&config)?;
        let frame = config.frame_samples();
        // periodic Hann
        let window = (0..frame)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / frame as f64).cos())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(config.fft_size);
        Ok(SpectrogramExtractor {
            config,
            window,
            fft,
            bank,
        })
    }

    pub fn config(&self) -> &DspConfig {
        &self.config
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.bank
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// The clip must already be at `config.target_rate`.
    pub fn compute(&self, clip: &AudioClip) -> Result<MelSpectrogram, DspError> {
        let cfg = &self.config;
        if clip.sample_rate() != cfg.target_rate {
            return Err(DspError::RateMismatch {
                expected: cfg.target_rate,
                actual: clip.sample_rate(),
            });
        }
        let samples = clip.samples();
        let frame = cfg.frame_samples();
        let hop = cfg.hop_samples();
        if samples.len() < frame {
            return Err(DspError::TooShort {
                samples: samples.len(),
                frame,
            });
        }
        let n_frames = 1 + (samples.len() - frame) / hop;
        let n_mels = cfg.n_mels;
        let floor_log = cfg.log_floor.ln();

        let mut data = vec![0.0; n_frames * n_mels];
        let mut buf = vec![Complex::new(0.0, 0.0); cfg.fft_size];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut power = vec![0.0; cfg.n_bins()];
        for (t, out) in data.chunks_exact_mut(n_mels).enumerate() {
            let start = t * hop;
            for (i, slot) in buf.iter_mut().enumerate() {
                let re = if i < frame {
                    samples[start + i] * self.window[i]
                } else {
                    0.0
                };
                *slot = Complex::new(re, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (p, c) in power.iter_mut().zip(&buf) {
                *p = c.norm_sqr();
            }
            self.bank.apply_into(&power, out);
            for v in out.iter_mut() {
                *v = if *v > cfg.log_floor { v.ln() } else { floor_log };
            }
        }
        Ok(MelSpectrogram {
            n_frames,
            n_mels,
            data,
            config: cfg.clone(),
        })
    }
}

/// `|DFT|^2` over bins `0..=fft_size/2` of one frame, zero-padded.
pub fn power_spectrum(frame: &[f64], fft_size: usize) -> Vec<f64> {
    assert!(frame.len() <= fft_size);
    let fft = FftPlanner::new().plan_fft_forward(fft_size);
    let mut buf: Vec<Complex<f64>> = frame
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(fft_size)
        .collect();
    fft.process(&mut buf);
    buf[..=fft_size / 2].iter().map(|c| c.norm_sqr()).collect()
}

/// One-shot convenience over [`SpectrogramExtractor`].
pub fn compute_mel_spectrogram(clip: &AudioClip, config: &DspConfig) -> Result<MelSpectrogram, DspError> {
    SpectrogramExtractor::new(config.clone())?.compute(clip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::hz_to_mel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 16000).unwrap()
    }

    #[test]
    fn zero_clip_hits_the_floor_everywhere() {
        let cfg = DspConfig::default();
        let spec = compute_mel_spectrogram(&clip(vec![0.0; 32000]), &cfg).unwrap();
        assert_eq!(spec.n_frames(), 1 + (32000 - 400) / 160);
        assert!(spec.data().iter().all(|&v| v == cfg.log_floor.ln()));
    }

    #[test]
    fn frame_count() {
        let cfg = DspConfig::default();
        for n in [400, 401, 559, 560, 16000] {
            let spec = compute_mel_spectrogram(&clip(vec![0.1; n]), &cfg).unwrap();
            assert_eq!(spec.n_frames(), 1 + (n - 400) / 160, "n={n}");
        }
    }

    #[test]
    fn shorter_than_a_frame() {
        let err = compute_mel_spectrogram(&clip(vec![0.1; 399]), &DspConfig::default()).unwrap_err();
        assert_eq!(err, DspError::TooShort { samples: 399, frame: 400 });
    }

    #[test]
    fn wrong_rate_is_rejected() {
        let c = AudioClip::new(vec![0.1; 8000], 8000).unwrap();
        assert!(matches!(
            compute_mel_spectrogram(&c, &DspConfig::default()),
            Err(DspError::RateMismatch { .. })
        ));
    }

    #[test]
    fn tone_lands_in_nearest_band() {
        let cfg = DspConfig::default();
        let ex = SpectrogramExtractor::new(cfg.clone()).unwrap();
        let s: Vec<f64> = (0..16000)
            .map(|i| 0.9 * (2.0 * PI * 1000.0 * i as f64 / 16000.0).sin())
            .collect();
        let spec = ex.compute(&clip(s)).unwrap();
        let bin_hz = 16000.0 / 512.0;
        // band whose (bin-snapped) center is nearest 1 kHz
        let target_mel = hz_to_mel(1000.0);
        let expected = (0..cfg.n_mels)
            .min_by(|&a, &b| {
                let da = (hz_to_mel(ex.filterbank().center_bin(a) as f64 * bin_hz) - target_mel).abs();
                let db = (hz_to_mel(ex.filterbank().center_bin(b) as f64 * bin_hz) - target_mel).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        for frame in spec.frames() {
            let argmax = frame
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(argmax, expected);
        }
    }

    #[test]
    fn parseval_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let window: Vec<f64> = (0..400)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / 400.0).cos())
            .collect();
        for _ in 0..100 {
            let frame: Vec<f64> = window.iter().map(|w| w * rng.random_range(-1.0..1.0)).collect();
            let energy: f64 = frame.iter().map(|x| x * x).sum();
            let p = power_spectrum(&frame, 512);
            // bins 1..N/2-1 appear twice in the full spectrum
            let doubled: f64 = p[0] + p[256] + 2.0 * p[1..256].iter().sum::<f64>();
            let parseval = doubled / 512.0;
            assert!((parseval - energy).abs() <= 1e-6 * energy);
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s: Vec<f64> = (0..16000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = DspConfig::default();
        let a = compute_mel_spectrogram(&clip(s.clone()), &cfg).unwrap();
        let b = compute_mel_spectrogram(&clip(s), &cfg).unwrap();
        assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
