use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    /// Kernel width; `None` uses `1 / (d · Var(X))` of the training rows.
    pub gamma: Option<f64>,
    pub tol: f64,
    /// Stop after this many consecutive sweeps without an update.
    pub max_passes: usize,
    /// Hard cap on sweeps over the training rows.
    pub max_sweeps: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, gamma: None, tol: 1e-3, max_passes: 200, max_sweeps: 20_000 }
    }
}

/// Binary RBF SVM. Class 1 maps to `+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub support: Vec<Vec<f64>>,
    /// Training-row index of each support vector.
    pub support_indices: Vec<usize>,
    /// `α_i · y_i` per support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub tol: f64,
    /// `a` in `P(class 1) = σ(a · f(x))`, fitted on training decisions.
    pub prob_scale: f64,
}

pub fn rbf(gamma: f64, u: &[f64], v: &[f64]) -> f64 {
    (-gamma * u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp()
}

/// `Σ α_i y_i K(x_i, x) + b`.
pub fn svm_decision(p: &SvmParams, x: &[f64]) -> f64 {
    p.support.iter().zip(&p.dual_coef).map(|(s, a)| a * rbf(p.gamma, s, x)).sum::<f64>() + p.bias
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

impl SvmParams {
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let p = sigmoid(self.prob_scale * svm_decision(self, x));
        vec![1.0 - p, p]
    }
}

/// Dual objective `Σα − ½ ΣΣ α_i α_j y_i y_j K_ij` with `y ∈ {−1, +1}`.
pub fn dual_objective(x: &[Vec<f64>], y_signed: &[f64], alpha: &[f64], gamma: f64) -> f64 {
    let mut quad = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            quad += alpha[i] * alpha[j] * y_signed[i] * y_signed[j] * rbf(gamma, &x[i], &x[j]);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

fn default_gamma(x: &[Vec<f64>]) -> f64 {
    let d = x[0].len() as f64;
    let n = x.len() as f64 * d;
    let mean = x.iter().flatten().sum::<f64>() / n;
    let var = x.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (d * var)
    } else {
        1.0
    }
}

/// Maximum-likelihood `a > 0` for `σ(a f)` against smoothed targets.
fn fit_scale(decisions: &[f64], y_signed: &[f64]) -> f64 {
    let n_pos = y_signed.iter().filter(|&&v| v > 0.0).count() as f64;
    let n_neg = y_signed.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = y_signed.iter().map(|&v| if v > 0.0 { hi } else { lo }).collect();
    let nll = |a: f64| -> f64 {
        decisions
            .iter()
            .zip(&t)
            .map(|(&f, &t)| {
                let s = a * f;
                // softplus(s) - t s
                let sp = if s > 0.0 { s + (-s).exp().ln_1p() } else { s.exp().ln_1p() };
                sp - t * s
            })
            .sum()
    };
    let mut a: f64 = 1.0;
    for _ in 0..100 {
        let (mut g, mut h) = (0.0, 0.0);
        for (&f, &t) in decisions.iter().zip(&t) {
            let p = sigmoid(a * f);
            g += (p - t) * f;
            h += p * (1.0 - p) * f * f;
        }
        if g.abs() < 1e-10 || h <= 0.0 {
            break;
        }
        let mut step = g / h;
        let base = nll(a);
        while step.abs() > 1e-14 && nll(a - step) > base {
            step *= 0.5;
        }
        a = (a - step).clamp(1e-6, 1e6);
    }
    a
}

/// Kernel rows, precomputed when the full matrix is small enough.
struct Gram<'a> {
    x: &'a [Vec<f64>],
    gamma: f64,
    full: Option<Vec<f64>>,
}

const GRAM_LIMIT: usize = 6000;

impl<'a> Gram<'a> {
    fn new(x: &'a [Vec<f64>], gamma: f64) -> Self {
        let n = x.len();
        let full = (n <= GRAM_LIMIT).then(|| {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                k[i * n + i] = 1.0;
                for j in 0..i {
                    let v = rbf(gamma, &x[i], &x[j]);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            k
        });
        Self { x, gamma, full }
    }

    fn row(&self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        let n = self.x.len();
        match &self.full {
            Some(k) => std::borrow::Cow::Borrowed(&k[i * n..(i + 1) * n]),
            None => std::borrow::Cow::Owned(self.x.iter().map(|r| rbf(self.gamma, &self.x[i], r)).collect()),
        }
    }
}

/// Simplified SMO with an error cache and seeded random second index.
pub fn train_svm(x: &[Vec<f64>], y: &[usize], cfg: &SvmConfig, seed: u64) -> Result<SvmParams> {
    if !(cfg.c > 0.0) || !(cfg.tol > 0.0) || cfg.gamma.is_some_and(|g| !(g > 0.0)) {
        return Err(Error::Config("SVM needs C > 0, tol > 0 and gamma > 0".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::contract("SVM needs at least two rows"));
    }
    let gamma = cfg.gamma.unwrap_or_else(|| default_gamma(x));
    let c = cfg.c;
    let ys: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
    let gram = Gram::new(x, gamma);
    let mut alpha = vec![0.0; n];
    let mut b = 0.0;
    // f(x_k) - y_k with all α = 0
    let mut err: Vec<f64> = ys.iter().map(|v| -v).collect();
    let mut rng = seed::rng(seed);
    let mut passes = 0;
    let mut sweeps = 0;
    while passes < cfg.max_passes && sweeps < cfg.max_sweeps {
        sweeps += 1;
        let mut changed = 0;
        for i in 0..n {
            let ei = err[i];
            let r = ys[i] * ei;
            if !((r < -cfg.tol && alpha[i] < c) || (r > cfg.tol && alpha[i] > 0.0)) {
                continue;
            }
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let ej = err[j];
            let (ai_old, aj_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if ys[i] != ys[j] {
                ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
            } else {
                ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
            };
            if lo >= hi {
                continue;
            }
            let ki = gram.row(i);
            let kj = gram.row(j);
            let eta = 2.0 * ki[j] - ki[i] - kj[j];
            if eta >= 0.0 {
                continue;
            }
            let aj = (aj_old - ys[j] * (ei - ej) / eta).clamp(lo, hi);
            if (aj - aj_old).abs() < 1e-5 {
                continue;
            }
            let ai = ai_old + ys[i] * ys[j] * (aj_old - aj);
            let ai = ai.clamp(0.0, c);
            let di = ys[i] * (ai - ai_old);
            let dj = ys[j] * (aj - aj_old);
            let b1 = b - ei - di * ki[i] - dj * ki[j];
            let b2 = b - ej - di * ki[j] - dj * kj[j];
            let b_new = if ai > 0.0 && ai < c {
                b1
            } else if aj > 0.0 && aj < c {
                b2
            } else {
                0.5 * (b1 + b2)
            };
            let db = b_new - b;
            for k in 0..n {
                err[k] += di * ki[k] + dj * kj[k] + db;
            }
            alpha[i] = ai;
            alpha[j] = aj;
            b = b_new;
            changed += 1;
        }
        passes = if changed == 0 { passes + 1 } else { 0 };
    }
    if !b.is_finite() || alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::Divergence { epoch: sweeps, detail: "non-finite SMO state".into() });
    }
    let support_indices: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    let mut p = SvmParams {
        support: support_indices.iter().map(|&i| x[i].clone()).collect(),
        dual_coef: support_indices.iter().map(|&i| alpha[i] * ys[i]).collect(),
        support_indices,
        bias: b,
        gamma,
        c,
        tol: cfg.tol,
        prob_scale: 1.0,
    };
    let decisions: Vec<f64> = x.iter().map(|r| svm_decision(&p, r)).collect();
    p.prob_scale = fit_scale(&decisions, &ys);
    Ok(p)
}
