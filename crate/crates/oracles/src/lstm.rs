/// One LSTM direction, packed gate order i, f, g, o.
#[derive(Debug, Clone)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden: usize,
    /// `4*hidden x input_dim`, row-major
    pub w: Vec<f64>,
    /// `4*hidden x hidden`, row-major
    pub u: Vec<f64>,
    /// `4*hidden`
    pub b: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One cell step written as explicit scalar loops, gate by gate.
pub fn cell_step(p: &LstmParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let hd = p.hidden;
    let mut h = vec![0.0; hd];
    let mut c = vec![0.0; hd];
    for j in 0..hd {
        let mut pre = [0.0f64; 4];
        for (gate, slot) in pre.iter_mut().enumerate() {
            let row = gate * hd + j;
            let mut s = p.b[row];
            for k in 0..p.input_dim {
                s += p.w[row * p.input_dim + k] * x[k];
            }
            for k in 0..hd {
                s += p.u[row * hd + k] * h_prev[k];
            }
            *slot = s;
        }
        let i = sigmoid(pre[0]);
        let f = sigmoid(pre[1]);
        let g = pre[2].tanh();
        let o = sigmoid(pre[3]);
        c[j] = f * c_prev[j] + i * g;
        h[j] = o * c[j].tanh();
    }
    (h, c)
}

/// Standardize, run both directions from zero state, mean-pool, concatenate
/// (forward first) and apply the sigmoid head.
#[allow(clippy::too_many_arguments)]
pub fn blstm_score(
    frames: &[Vec<f64>],
    mean: &[f64],
    std: &[f64],
    fwd: &LstmParams,
    bwd: &LstmParams,
    dense_w: &[f64],
    dense_b: f64,
) -> f64 {
    let t_len = frames.len();
    let xs: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| (0..f.len()).map(|k| (f[k] - mean[k]) / std[k]).collect())
        .collect();
    let mut pooled = Vec::new();
    for (params, reverse) in [(fwd, false), (bwd, true)] {
        let hd = params.hidden;
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let mut sum = vec![0.0; hd];
        for step in 0..t_len {
            let t = if reverse { t_len - 1 - step } else { step };
            let (h2, c2) = cell_step(params, &xs[t], &h, &c);
            h = h2;
            c = c2;
            for j in 0..hd {
                sum[j] += h[j];
            }
        }
        for s in sum {
            pooled.push(s / t_len as f64);
        }
    }
    let mut z = dense_b;
    for (w, v) in dense_w.iter().zip(&pooled) {
        z += w * v;
    }
    sigmoid(z)
}
