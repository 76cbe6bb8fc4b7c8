use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    /// L2 strength; the penalty is `lambda / (2n) * ||w||²` (bias excluded).
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self { lambda: 1.0, max_iter: 1000, tol: 1e-6 }
    }
}

/// One weight vector per class for one-vs-rest, or a single vector for the
/// binary case (scoring class 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^v)` without overflow.
fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

fn score(w: &[f64], b: f64, x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b
}

impl LogRegParams {
    pub fn n_classes(&self) -> usize {
        if self.weights.len() == 1 {
            2
        } else {
            self.weights.len()
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        if self.weights.len() == 1 {
            let p = sigmoid(score(&self.weights[0], self.bias[0], x));
            return vec![1.0 - p, p];
        }
        let raw: Vec<f64> = self.weights.iter().zip(&self.bias).map(|(w, &b)| sigmoid(score(w, b, x))).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / s).collect()
    }
}

fn objective(w: &[f64], b: f64, x: &[Vec<f64>], t: &[f64], lambda: f64) -> f64 {
    let n = x.len() as f64;
    let ce: f64 = x
        .iter()
        .zip(t)
        .map(|(r, &y)| {
            let s = score(w, b, r);
            // -[y ln σ(s) + (1-y) ln(1-σ(s))]
            softplus(s) - y * s
        })
        .sum();
    ce / n + lambda / (2.0 * n) * w.iter().map(|v| v * v).sum::<f64>()
}

/// Full-batch gradient descent with step `1/L`, where `L` bounds the
/// Hessian's spectral norm, so the objective never increases.
fn fit_binary(x: &[Vec<f64>], t: &[f64], cfg: &LogRegConfig) -> (Vec<f64>, f64, Vec<f64>) {
    let n = x.len() as f64;
    let d = x[0].len();
    let frob: f64 = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).sum();
    let lipschitz = frob / (4.0 * n) + cfg.lambda / n;
    let step = 1.0 / lipschitz;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut trace = vec![objective(&w, b, x, t, cfg.lambda)];
    for _ in 0..cfg.max_iter {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (r, &y) in x.iter().zip(t) {
            let e = sigmoid(score(&w, b, r)) - y;
            for (g, v) in gw.iter_mut().zip(r) {
                *g += e * v;
            }
            gb += e;
        }
        for (g, wk) in gw.iter_mut().zip(&w) {
            *g = *g / n + cfg.lambda / n * wk;
        }
        gb /= n;
        let gnorm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        for (wk, g) in w.iter_mut().zip(&gw) {
            *wk -= step * g;
        }
        b -= step * gb;
        let f = objective(&w, b, x, t, cfg.lambda);
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(f);
        if gnorm < cfg.tol || (prev - f).abs() < cfg.tol * prev.abs().max(1.0) {
            break;
        }
    }
    (w, b, trace)
}

/// Trains and returns the per-class objective traces.
pub fn train_logreg_traced(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &LogRegConfig) -> Result<(LogRegParams, Vec<Vec<f64>>)> {
    if !(cfg.lambda >= 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::Config("logistic regression needs lambda >= 0 and tol > 0".into()));
    }
    let targets: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    let mut traces = Vec::new();
    for c in targets {
        let t: Vec<f64> = y.iter().map(|&v| f64::from(u8::from(v == c))).collect();
        let (w, b, trace) = fit_binary(x, &t, cfg);
        if !trace.last().is_some_and(|f| f.is_finite()) {
            return Err(Error::Divergence { epoch: trace.len(), detail: "non-finite logistic loss".into() });
        }
        weights.push(w);
        bias.push(b);
        traces.push(trace);
    }
    Ok((LogRegParams { weights, bias, lambda: cfg.lambda, max_iter: cfg.max_iter, tol: cfg.tol }, traces))
}

pub fn train_logreg(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &LogRegConfig) -> Result<LogRegParams> {
    Ok(train_logreg_traced(x, y, n_classes, cfg)?.0)
}
