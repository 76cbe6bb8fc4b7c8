//! SMOTE oversampling for two-class training partitions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self { k_neighbors: 5, seed: 0 }
    }
}

/// Output of [`smote`]: originals first, then synthetics in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    /// For each synthetic row (aligned with `x[n_original..]`), the input row
    /// indices of its base point and chosen neighbor.
    pub parents: Vec<(usize, usize)>,
    pub n_original: usize,
}

impl SmoteOutput {
    pub fn synthetic_count(&self) -> usize {
        self.x.len() - self.n_original
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Up to `k` nearest minority rows for every minority row, by Euclidean
/// distance with ties broken by lower row index.
fn neighbor_lists(x: &[Vec<f64>], minority: &[usize], k: usize) -> Vec<Vec<usize>> {
    minority
        .iter()
        .map(|&i| {
            let mut cand: Vec<(f64, usize)> =
                minority.iter().filter(|&&j| j != i).map(|&j| (sq_dist(&x[i], &x[j]), j)).collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cand.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Adds synthetic minority rows until both classes have equal counts.
///
/// Base rows are taken round-robin over the minority in input order; each
/// synthetic row is `x + λ (nn − x)` with `nn` drawn uniformly from the base
/// row's k nearest minority neighbors and `λ ∈ [0, 1)`.
pub fn smote(x: &[Vec<f64>], y: &[usize], cfg: &SmoteConfig) -> Result<SmoteOutput> {
    if x.len() != y.len() {
        return Err(Error::contract("feature and label lengths differ"));
    }
    if cfg.k_neighbors == 0 {
        return Err(Error::Config("SMOTE k must be at least 1".into()));
    }
    if let Some(&bad) = y.iter().find(|&&c| c > 1) {
        return Err(Error::contract(format!("SMOTE expects binary labels, found class {bad}")));
    }
    let ones = y.iter().filter(|&&c| c == 1).count();
    let zeros = y.len() - ones;
    if ones == 0 || zeros == 0 {
        return Err(Error::contract("SMOTE needs both classes present"));
    }
    let minority_class = usize::from(ones < zeros);
    let minority: Vec<usize> = (0..y.len()).filter(|&i| y[i] == minority_class).collect();
    let needed = ones.max(zeros) - minority.len();

    let mut out = SmoteOutput { x: x.to_vec(), y: y.to_vec(), parents: Vec::with_capacity(needed), n_original: x.len() };
    if needed == 0 {
        return Ok(out);
    }
    let k_eff = cfg.k_neighbors.min(minority.len().saturating_sub(1));
    let neighbors = neighbor_lists(x, &minority, k_eff);
    let mut rng = seed::rng(cfg.seed);
    for s in 0..needed {
        let pos = s % minority.len();
        let base = minority[pos];
        let (nn, lambda) = if neighbors[pos].is_empty() {
            (base, 0.0)
        } else {
            let nn = neighbors[pos][rng.gen_range(0..neighbors[pos].len())];
            (nn, rng.gen::<f64>())
        };
        let row = x[base]
            .iter()
            .zip(&x[nn])
            .map(|(&a, &b)| {
                let v = a + lambda * (b - a);
                v.clamp(a.min(b), a.max(b))
            })
            .collect();
        out.x.push(row);
        out.y.push(minority_class);
        out.parents.push((base, nn));
    }
    Ok(out)
}
