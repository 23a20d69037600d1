use super::ModelError;

/// Parameters of one LSTM direction. Gates are packed in the order
/// input, forget, cell candidate, output: rows `g*hidden..(g+1)*hidden` of
/// each matrix belong to gate `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    input_dim: usize,
    hidden_dim: usize,
    /// `4*hidden x input`, row-major
    w: Vec<f64>,
    /// `4*hidden x hidden`, row-major
    u: Vec<f64>,
    /// `4*hidden`
    b: Vec<f64>,
}

impl LstmParams {
    pub fn new(
        input_dim: usize,
        hidden_dim: usize,
        w: Vec<f64>,
        u: Vec<f64>,
        b: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let rows = 4 * hidden_dim;
        for (name, got, want) in [
            ("W", w.len(), rows * input_dim),
            ("U", u.len(), rows * hidden_dim),
            ("b", b.len(), rows),
        ] {
            if got != want {
                return Err(ModelError::ShapeMismatch(format!(
                    "{name} has {got} entries, expected {want}"
                )));
            }
        }
        if input_dim == 0 || hidden_dim == 0 {
            return Err(ModelError::ShapeMismatch("zero-sized LSTM".into()));
        }
        Ok(LstmParams {
            input_dim,
            hidden_dim,
            w,
            u,
            b,
        })
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let rows = 4 * hidden_dim;
        LstmParams {
            input_dim,
            hidden_dim,
            w: vec![0.0; rows * input_dim],
            u: vec![0.0; rows * hidden_dim],
            b: vec![0.0; rows],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Advances `h` and `c` in place by one time step. `gates` is scratch of
    /// length `4*hidden`.
    pub fn step_into(&self, x: &[f64], h: &mut [f64], c: &mut [f64], gates: &mut [f64]) {
        let (d, hd) = (self.input_dim, self.hidden_dim);
        debug_assert_eq!(x.len(), d);
        gates.copy_from_slice(&self.b);
        for (row, z) in gates.iter_mut().enumerate() {
            let w_row = &self.w[row * d..(row + 1) * d];
            let u_row = &self.u[row * hd..(row + 1) * hd];
            *z += dot(w_row, x) + dot(u_row, h);
        }
        for j in 0..hd {
            let i = sigmoid(gates[j]);
            let f = sigmoid(gates[hd + j]);
            let g = gates[2 * hd + j].tanh();
            let o = sigmoid(gates[3 * hd + j]);
            c[j] = f * c[j] + i * g;
            h[j] = o * c[j].tanh();
        }
    }

    /// Runs the cell over `xs` from zero state. Returns the hidden state after
    /// every step, in processing order.
    pub fn run<'a>(&self, xs: impl Iterator<Item = &'a [f64]>) -> Vec<Vec<f64>> {
        let hd = self.hidden_dim;
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let mut gates = vec![0.0; 4 * hd];
        xs.map(|x| {
            self.step_into(x, &mut h, &mut c, &mut gates);
            h.clone()
        })
        .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One LSTM step: returns the new `(h, c)`.
pub fn lstm_cell_step(x: &[f64], h_prev: &[f64], c_prev: &[f64], params: &LstmParams) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(x.len(), params.input_dim, "input width");
    assert_eq!(h_prev.len(), params.hidden_dim, "hidden width");
    assert_eq!(c_prev.len(), params.hidden_dim, "cell width");
    let mut h = h_prev.to_vec();
    let mut c = c_prev.to_vec();
    let mut gates = vec![0.0; 4 * params.hidden_dim];
    params.step_into(x, &mut h, &mut c, &mut gates);
    (h, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rspscrn_oracles::lstm as oracle;

    #[test]
    fn zero_params_give_zero_state() {
        let p = LstmParams::zeros(3, 2);
        let (h, c) = lstm_cell_step(&[0.3, -1.0, 5.0], &[0.0, 0.0], &[0.0, 0.0], &p);
        assert_eq!(h, vec![0.0, 0.0]);
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn saturated_input_and_candidate_gates() {
        // i = sigmoid(100) ~ 1, g = tanh(100) ~ 1, f = o = sigmoid(0) = 0.5
        let mut b = vec![0.0; 4];
        b[0] = 100.0;
        b[2] = 100.0;
        let p = LstmParams::new(1, 1, vec![0.0; 4], vec![0.0; 4], b).unwrap();
        let (h, c) = lstm_cell_step(&[0.7], &[0.0], &[0.0], &p);
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!((h[0] - 0.5 * 1f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn matches_scalar_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (d, hd) = (3, 2);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let (w, u, b) = (draw(4 * hd * d), draw(4 * hd * hd), draw(4 * hd));
        let (x, h0, c0) = (draw(d), draw(hd), draw(hd));
        let p = LstmParams::new(d, hd, w.clone(), u.clone(), b.clone()).unwrap();
        let o = oracle::LstmParams {
            input_dim: d,
            hidden: hd,
            w,
            u,
            b,
        };
        let (h, c) = lstm_cell_step(&x, &h0, &c0, &p);
        let (ho, co) = oracle::cell_step(&o, &x, &h0, &c0);
        for j in 0..hd {
            assert!((h[j] - ho[j]).abs() < 1e-12);
            assert!((c[j] - co[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_checks() {
        assert!(LstmParams::new(2, 1, vec![0.0; 7], vec![0.0; 4], vec![0.0; 4]).is_err());
        assert!(LstmParams::new(2, 1, vec![0.0; 8], vec![0.0; 3], vec![0.0; 4]).is_err());
        assert!(LstmParams::new(2, 1, vec![0.0; 8], vec![0.0; 4], vec![0.0; 5]).is_err());
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
        assert!(sigmoid(20.0) > 0.999_999);
    }
}
