use std::f64::consts::PI;

/// `|X_k|^2` for `k = 0..=n/2` of a zero-padded length-`n` frame, by direct
/// O(n^2) summation.
pub fn naive_power_spectrum(frame: &[f64], n: usize) -> Vec<f64> {
    assert!(frame.len() <= n);
    // twiddle table keeps the summation direct but avoids n^2 trig calls
    let cos: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
    let sin: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin()).collect();
    (0..=n / 2)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (t, x) in frame.iter().enumerate() {
                let j = (k * t) % n;
                re += x * cos[j];
                im -= x * sin[j];
            }
            re * re + im * im
        })
        .collect()
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

pub struct MelParams {
    pub sample_rate: f64,
    pub frame: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub log_floor: f64,
}

/// Log-mel spectrogram, one `Vec` per frame, via naive DFT and the
/// brute-force filterbank.
pub fn naive_log_mel(samples: &[f64], p: &MelParams) -> Vec<Vec<f64>> {
    let window = hann(p.frame);
    let mut frames = Vec::new();
    let mut start = 0;
    while start + p.frame <= samples.len() {
        let windowed: Vec<f64> = samples[start..start + p.frame]
            .iter()
            .zip(&window)
            .map(|(s, w)| s * w)
            .collect();
        let power = naive_power_spectrum(&windowed, p.fft_size);
        let bands = crate::filterbank::brute_force_band_energies(
            &power,
            p.n_mels,
            p.fft_size,
            p.sample_rate,
            p.fmin,
            p.fmax,
        );
        frames.push(bands.into_iter().map(|e| e.max(p.log_floor).ln()).collect());
        start += p.hop;
    }
    frames
}

/// Index of the largest DFT magnitude among bins `1..=n/2`.
pub fn dominant_bin(samples: &[f64]) -> usize {
    let power = naive_power_spectrum(samples, samples.len());
    power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, _)| k)
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impulse_has_flat_spectrum() {
        let p = naive_power_spectrum(&[1.0], 8);
        assert_eq!(p, vec![1.0; 5]);
    }

    #[test]
    fn sine_peaks_at_its_bin() {
        let n = 64;
        let s: Vec<f64> = (0..n).map(|i| (2.0 * PI * 5.0 * i as f64 / n as f64).sin()).collect();
        assert_eq!(dominant_bin(&s), 5);
    }
}
