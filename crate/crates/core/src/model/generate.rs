use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BlstmModel, LstmParams};
use crate::category::SoundCategory;

/// Seeded random weights for exercising the runtime. Every value is rounded
/// through float32 so the in-memory model equals what a weight file holds.
///
/// Standardization statistics are set near typical log-mel levels of
/// peak-normalized audio so that real features land in a sensible range.
pub fn random_model(category: SoundCategory, input_dim: usize, hidden_dim: usize, seed: u64) -> BlstmModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (hidden_dim as f64).sqrt();
    let rows = 4 * hidden_dim;

    let mut direction = || {
        let w = uniform(&mut rng, rows * input_dim, scale, 0.0);
        let u = uniform(&mut rng, rows * hidden_dim, scale, 0.0);
        let mut b = uniform(&mut rng, rows, 0.1, 0.0);
        // forget-gate bias of +1
        for v in &mut b[hidden_dim..2 * hidden_dim] {
            *v = quantize(*v + 1.0);
        }
        LstmParams::new(input_dim, hidden_dim, w, u, b).expect("consistent shapes")
    };
    let forward = direction();
    let backward = direction();
    let dense_w = uniform(&mut rng, 2 * hidden_dim, 4.0 * scale, 0.0);
    let dense_b = uniform(&mut rng, 1, 0.5, 0.0)[0];
    let feat_mean = uniform(&mut rng, input_dim, 1.0, -6.0);
    let feat_std = uniform(&mut rng, input_dim, 0.5, 3.0);

    BlstmModel::new(category, forward, backward, dense_w, dense_b, feat_mean, feat_std)
        .expect("generated weights are finite and std positive")
}

fn quantize(v: f64) -> f64 {
    v as f32 as f64
}

/// `n` draws from `center ± half_width`, rounded to float32.
fn uniform(rng: &mut ChaCha8Rng, n: usize, half_width: f64, center: f64) -> Vec<f64> {
    (0..n)
        .map(|_| quantize(center + rng.random_range(-half_width..half_width)))
        .collect()
}
