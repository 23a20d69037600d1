/// Mel-band energies of a power spectrum, recomputing every triangular
/// weight per (band, bin) from the HTK mel formula.
pub fn brute_force_band_energies(
    power: &[f64],
    n_mels: usize,
    fft_size: usize,
    sample_rate: f64,
    fmin: f64,
    fmax: f64,
) -> Vec<f64> {
    let n_bins = fft_size / 2 + 1;
    assert_eq!(power.len(), n_bins);
    let to_mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let to_hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let bin_of = |i: usize| {
        let m = to_mel(fmin) + (to_mel(fmax) - to_mel(fmin)) * i as f64 / (n_mels + 1) as f64;
        let b = (to_hz(m) * fft_size as f64 / sample_rate).round() as usize;
        b.min(n_bins - 1)
    };
    (0..n_mels)
        .map(|band| {
            let (lo, c, hi) = (bin_of(band), bin_of(band + 1), bin_of(band + 2));
            let mut acc = 0.0;
            for (k, p) in power.iter().enumerate() {
                let w = if k < lo || k > hi {
                    0.0
                } else if k <= c {
                    (k - lo) as f64 / (c - lo) as f64
                } else {
                    (hi - k) as f64 / (hi - c) as f64
                };
                acc += w * p;
            }
            acc
        })
        .collect()
}
