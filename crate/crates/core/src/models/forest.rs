use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features examined per split; `None` means `⌊√d⌋`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub min_samples_split: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 5, max_features: None, bootstrap: true, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub bootstrap_seed: u64,
}

impl Tree {
    fn leaf(&self, x: &[f64]) -> &[usize] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { counts } => return counts,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let counts = self.leaf(x);
        let mut best = 0;
        for (c, &k) in counts.iter().enumerate() {
            if k > counts[best] {
                best = c;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
    pub max_features: usize,
    pub criterion: String,
}

impl ForestParams {
    /// Vote shares of the trees' hard predictions.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1.0;
        }
        let n = self.trees.len() as f64;
        votes.into_iter().map(|v| v / n).collect()
    }
}

/// `1 − Σ p²`.
pub fn gini_impurity(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::contract("gini impurity of an empty node"));
    }
    let t = total as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>())
}

fn gini_of(counts: &[usize], total: usize) -> f64 {
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

fn best_split_on(x: &[Vec<f64>], y: &[usize], rows: &[usize], feature: usize, n_classes: usize) -> Option<Best> {
    let mut sorted: Vec<usize> = rows.to_vec();
    sorted.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
    let mut right = vec![0usize; n_classes];
    for &r in rows {
        right[y[r]] += 1;
    }
    let mut left = vec![0usize; n_classes];
    let n = rows.len();
    let mut best: Option<Best> = None;
    for k in 0..n - 1 {
        let r = sorted[k];
        left[y[r]] += 1;
        right[y[r]] -= 1;
        let (a, b) = (x[r][feature], x[sorted[k + 1]][feature]);
        if a == b {
            continue;
        }
        let nl = k + 1;
        let nr = n - nl;
        let score = (nl as f64 * gini_of(&left, nl) + nr as f64 * gini_of(&right, nr)) / n as f64;
        // strict improvement keeps the lowest threshold on ties
        if best.as_ref().map_or(true, |bst| score < bst.score) {
            best = Some(Best { score, feature, threshold: a + (b - a) / 2.0 });
        }
    }
    best
}

fn is_constant(x: &[Vec<f64>], rows: &[usize], feature: usize) -> bool {
    let v = x[rows[0]][feature];
    rows.iter().all(|&r| x[r][feature] == v)
}

fn grow(x: &[Vec<f64>], y: &[usize], sample: Vec<usize>, n_classes: usize, m: usize, min_split: usize, rng: &mut seed::Rng) -> Vec<Node> {
    let d = x[0].len();
    let mut nodes: Vec<Node> = Vec::new();
    // (rows, node slot)
    let mut stack = vec![(sample, 0usize)];
    nodes.push(Node::Leaf { counts: vec![] });
    while let Some((rows, slot)) = stack.pop() {
        let mut counts = vec![0usize; n_classes];
        for &r in &rows {
            counts[y[r]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let mut chosen = Vec::new();
        if !pure && rows.len() >= min_split {
            let mut order: Vec<usize> = (0..d).collect();
            order.shuffle(rng);
            for f in order {
                if chosen.len() == m {
                    break;
                }
                if !is_constant(x, &rows, f) {
                    chosen.push(f);
                }
            }
            chosen.sort_unstable();
        }
        let mut best: Option<Best> = None;
        for &f in &chosen {
            if let Some(b) = best_split_on(x, y, &rows, f, n_classes) {
                if best.as_ref().map_or(true, |cur| b.score < cur.score) {
                    best = Some(b);
                }
            }
        }
        match best {
            None => nodes[slot] = Node::Leaf { counts },
            Some(b) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][b.feature] <= b.threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { counts: vec![] });
                let right = nodes.len();
                nodes.push(Node::Leaf { counts: vec![] });
                nodes[slot] = Node::Split { feature: b.feature, threshold: b.threshold, left, right };
                stack.push((r, right));
                stack.push((l, left));
            }
        }
    }
    nodes
}

/// Grows one tree on a bootstrap sample (or all rows).
pub fn grow_tree(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &ForestConfig, m: usize, tree_seed: u64) -> Tree {
    let mut rng = seed::rng(tree_seed);
    let n = x.len();
    let sample: Vec<usize> = if cfg.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
    Tree { nodes: grow(x, y, sample, n_classes, m, cfg.min_samples_split.max(2), &mut rng), bootstrap_seed: tree_seed }
}

pub fn train_forest(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &ForestConfig, seed: u64) -> Result<ForestParams> {
    if cfg.n_trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    let d = x[0].len();
    let m = cfg.max_features.unwrap_or(((d as f64).sqrt().floor() as usize).max(1)).clamp(1, d);
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(x, y, n_classes, cfg, m, seed::derive(seed, &format!("tree-{t}"))))
        .collect();
    Ok(ForestParams { trees, n_classes, max_features: m, criterion: "gini".into() })
}

/// Row indices drawn for a tree's bootstrap sample.
pub fn bootstrap_sample(n: usize, tree_seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(tree_seed);
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}
