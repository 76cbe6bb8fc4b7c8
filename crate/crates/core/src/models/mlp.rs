use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self { hidden: 36, learning_rate: 0.01, epochs: 200, batch_size: 32 }
    }
}

/// One sigmoid hidden layer and a softmax output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<usize>,
    pub activation: String,
    /// `hidden × inputs`
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// `classes × hidden`
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl MlpParams {
    pub fn zeros(inputs: usize, hidden: usize, classes: usize) -> Self {
        Self {
            layers: vec![inputs, hidden, classes],
            activation: "sigmoid".into(),
            w1: vec![vec![0.0; inputs]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![vec![0.0; hidden]; classes],
            b2: vec![0.0; classes],
        }
    }

    /// Xavier-uniform weights, zero biases.
    pub fn xavier(inputs: usize, hidden: usize, classes: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::zeros(inputs, hidden, classes);
        let l1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + classes) as f64).sqrt();
        for w in p.w1.iter_mut().flatten() {
            *w = rng.gen_range(-l1..l1);
        }
        for w in p.w2.iter_mut().flatten() {
            *w = rng.gen_range(-l2..l2);
        }
        p
    }

    pub fn n_classes(&self) -> usize {
        self.b2.len()
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        self.w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| sigmoid(w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b))
            .collect()
    }

    fn output(&self, h: &[f64]) -> Vec<f64> {
        let logits: Vec<f64> =
            self.w2.iter().zip(&self.b2).map(|(w, b)| w.iter().zip(h).map(|(a, v)| a * v).sum::<f64>() + b).collect();
        softmax(&logits)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        self.output(&self.hidden(x))
    }

    /// Mean cross-entropy over a batch.
    pub fn loss(&self, x: &[Vec<f64>], y: &[usize]) -> f64 {
        let total: f64 = x.iter().zip(y).map(|(r, &c)| -self.predict_proba(r)[c].max(f64::MIN_POSITIVE).ln()).sum();
        total / x.len() as f64
    }

    /// All parameters in a fixed order: w1, b1, w2, b2 (row-major).
    pub fn flatten(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.w1.iter().flatten().copied().collect();
        v.extend(&self.b1);
        v.extend(self.w2.iter().flatten());
        v.extend(&self.b2);
        v
    }

    pub fn set_flat(&mut self, v: &[f64]) {
        let mut it = v.iter().copied();
        for w in self.w1.iter_mut().flatten().chain(self.b1.iter_mut()).chain(self.w2.iter_mut().flatten()).chain(self.b2.iter_mut()) {
            *w = it.next().expect("flat parameter vector too short");
        }
    }

    fn axpy(&mut self, alpha: f64, g: &MlpParams) {
        let pairs = self
            .w1
            .iter_mut()
            .flatten()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut().flatten())
            .chain(self.b2.iter_mut())
            .zip(g.w1.iter().flatten().chain(&g.b1).chain(g.w2.iter().flatten()).chain(&g.b2));
        for (p, d) in pairs {
            *p += alpha * d;
        }
    }
}

/// Exact gradients of the mean cross-entropy over `x`, returned with the
/// same shapes as the parameters, plus the loss itself.
pub fn mlp_backprop_gradients(p: &MlpParams, x: &[Vec<f64>], y: &[usize]) -> (f64, MlpParams) {
    let (n_in, n_hid, n_out) = (p.layers[0], p.layers[1], p.layers[2]);
    let mut g = MlpParams::zeros(n_in, n_hid, n_out);
    let mut loss = 0.0;
    let scale = 1.0 / x.len() as f64;
    for (row, &c) in x.iter().zip(y) {
        let h = p.hidden(row);
        let out = p.output(&h);
        loss -= out[c].max(f64::MIN_POSITIVE).ln();
        let delta2: Vec<f64> = (0..n_out).map(|k| out[k] - f64::from(u8::from(k == c))).collect();
        for k in 0..n_out {
            for j in 0..n_hid {
                g.w2[k][j] += scale * delta2[k] * h[j];
            }
            g.b2[k] += scale * delta2[k];
        }
        for j in 0..n_hid {
            let back: f64 = (0..n_out).map(|k| p.w2[k][j] * delta2[k]).sum();
            let d = back * h[j] * (1.0 - h[j]);
            for (i, v) in row.iter().enumerate() {
                g.w1[j][i] += scale * d * v;
            }
            g.b1[j] += scale * d;
        }
    }
    (loss * scale, g)
}

/// Mini-batch gradient descent with per-epoch shuffling.
pub fn train_mlp(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &MlpConfig, seed: u64) -> Result<MlpParams> {
    if cfg.hidden == 0 || cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::Config("MLP hidden width, batch size and learning rate must be positive".into()));
    }
    let mut rng = seed::rng(seed);
    let mut p = MlpParams::xavier(x[0].len(), cfg.hidden, n_classes, &mut rng);
    let mut order: Vec<usize> = (0..x.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let bx: Vec<Vec<f64>> = chunk.iter().map(|&i| x[i].clone()).collect();
            let by: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let (loss, g) = mlp_backprop_gradients(&p, &bx, &by);
            epoch_loss += loss * chunk.len() as f64;
            p.axpy(-cfg.learning_rate, &g);
        }
        if !epoch_loss.is_finite() || p.flatten().iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { epoch, detail: format!("loss {epoch_loss}") });
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central-difference gradient of the batch loss.
    fn numeric_gradient(p: &MlpParams, x: &[Vec<f64>], y: &[usize], eps: f64) -> Vec<f64> {
        let base = p.flatten();
        let mut q = p.clone();
        (0..base.len())
            .map(|i| {
                let mut v = base.clone();
                v[i] = base[i] + eps;
                q.set_flat(&v);
                let up = q.loss(x, y);
                v[i] = base[i] - eps;
                q.set_flat(&v);
                let down = q.loss(x, y);
                (up - down) / (2.0 * eps)
            })
            .collect()
    }

    #[test]
    fn zero_weights_give_uniform_scores() {
        let p = MlpParams::zeros(6, 36, 3);
        for s in p.predict_proba(&[1.0, -2.0, 0.5, 3.0, 0.0, 1.0]) {
            assert!((s - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn finite_differences_agree() {
        let mut rng = seed::rng(4);
        let x: Vec<Vec<f64>> = (0..5).map(|_| (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y = vec![0, 1, 2, 1, 0];
        let p = MlpParams::xavier(6, 8, 3, &mut rng);
        let (_, g) = mlp_backprop_gradients(&p, &x, &y);
        let num = numeric_gradient(&p, &x, &y, 1e-5);
        for (a, n) in g.flatten().iter().zip(&num) {
            assert!((a - n).abs() / a.abs().max(n.abs()).max(1e-6) < 1e-4, "{a} vs {n}");
        }
    }

    #[test]
    fn zero_weights_bias_gradient_is_mean_residual() {
        let p = MlpParams::zeros(2, 3, 2);
        let x = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let y = vec![0, 1];
        let (_, g) = mlp_backprop_gradients(&p, &x, &y);
        // softmax is (1/2, 1/2) everywhere; residuals cancel across the batch
        assert_eq!(g.b2, vec![0.0, 0.0]);
        let (_, g1) = mlp_backprop_gradients(&p, &x[..1], &y[..1]);
        assert_eq!(g1.b2, vec![-0.5, 0.5]);
    }

    #[test]
    fn duplicated_rows_give_same_gradient() {
        let mut rng = seed::rng(8);
        let p = MlpParams::xavier(3, 4, 2, &mut rng);
        let x = vec![vec![0.3, -0.2, 1.0]];
        let (_, a) = mlp_backprop_gradients(&p, &x, &[1]);
        let (_, b) = mlp_backprop_gradients(&p, &[x[0].clone(), x[0].clone()], &[1, 1]);
        for (u, v) in a.flatten().iter().zip(b.flatten()) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn separable_training_reaches_full_accuracy() {
        let mut rng = seed::rng(21);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..60 {
            let c = i % 2;
            let mut r: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            r[0] = if c == 1 { rng.gen_range(0.5..2.0) } else { rng.gen_range(-2.0..-0.5) };
            x.push(r);
            y.push(c);
        }
        let p = train_mlp(&x, &y, 2, &MlpConfig::default(), 3).unwrap();
        let correct = x.iter().zip(&y).filter(|(r, &c)| super::super::argmax(&p.predict_proba(r)) == c).count();
        assert_eq!(correct, 60);
    }

    #[test]
    fn divergence_names_epoch() {
        let x = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let cfg = MlpConfig { learning_rate: 1e308, epochs: 5, ..Default::default() };
        assert!(matches!(train_mlp(&x, &[0, 1], 2, &cfg, 0), Err(Error::Divergence { .. })));
    }
}
