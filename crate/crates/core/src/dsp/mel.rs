use super::{DspConfig, DspError};

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filters over the non-negative half of an FFT spectrum.
///
/// Band edges are snapped to the nearest FFT bin, so every filter peaks with
/// weight exactly 1 on its center bin and falls linearly to 0 at the centers
/// of its neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    n_mels: usize,
    n_bins: usize,
    /// row-major `n_mels x n_bins`
    weights: Vec<f64>,
    /// `n_mels + 2` bin indices: lower edge, the centers, upper edge
    points: Vec<usize>,
}

impl MelFilterbank {
    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn row(&self, band: usize) -> &[f64] {
        &self.weights[band * self.n_bins..(band + 1) * self.n_bins]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// FFT bin on which `band` peaks.
    pub fn center_bin(&self, band: usize) -> usize {
        self.points[band + 1]
    }

    /// Weighted band sums of a power spectrum of length `n_bins`.
    pub fn apply_into(&self, power: &[f64], out: &mut [f64]) {
        debug_assert_eq!(power.len(), self.n_bins);
        for (band, slot) in out.iter_mut().enumerate().take(self.n_mels) {
            let lo = self.points[band];
            let hi = self.points[band + 2];
            let row = self.row(band);
            *slot = (lo..=hi.min(self.n_bins - 1))
                .map(|k| row[k] * power[k])
                .sum();
        }
    }
}

pub fn mel_filterbank(config: &DspConfig) -> Result<MelFilterbank, DspError> {
    config.validate()?;
    let n_mels = config.n_mels;
    let n_bins = config.n_bins();
    let mel_lo = hz_to_mel(config.fmin);
    let mel_hi = hz_to_mel(config.fmax);
    let bin_hz = config.target_rate as f64 / config.fft_size as f64;

    let points: Vec<usize> = (0..n_mels + 2)
        .map(|i| {
            let m = mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64;
            ((mel_to_hz(m) / bin_hz).round() as usize).min(n_bins - 1)
        })
        .collect();
    if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
        return Err(DspError::DegenerateBand {
            lower: i,
            upper: i + 1,
            bin: points[i],
        });
    }

    let mut weights = vec![0.0; n_mels * n_bins];
    for band in 0..n_mels {
        let (lo, center, hi) = (points[band], points[band + 1], points[band + 2]);
        let row = &mut weights[band * n_bins..(band + 1) * n_bins];
        for (k, w) in row.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *w = if k <= center {
                (k - lo) as f64 / (center - lo) as f64
            } else {
                (hi - k) as f64 / (hi - center) as f64
            };
        }
    }
    Ok(MelFilterbank {
        n_mels,
        n_bins,
        weights,
        points,
    })
}
