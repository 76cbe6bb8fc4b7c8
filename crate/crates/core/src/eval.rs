//! Splits, confusion matrices, metrics and cross-validation reports.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Task;
use crate::models::{TrainSpec, TrainedModel, Variant};
use crate::seed;

/// Counts indexed `[truth][prediction]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let k = labels.len();
        Self { labels, counts: vec![vec![0; k]; k] }
    }

    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::contract("confusion counts must be square and match the labels"));
        }
        Ok(Self { labels, counts })
    }

    /// Binary matrix from the usual four cells, positive class at index 1.
    pub fn binary(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { labels: vec!["0".into(), "1".into()], counts: vec![vec![tn, fp], vec![fn_, tp]] }
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.labels != self.labels {
            return Err(Error::contract("cannot merge confusion matrices with different labels"));
        }
        for (a, b) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten()) {
            *a += b;
        }
        Ok(())
    }
}

pub fn confusion(preds: &[usize], truths: &[usize], labels: &[String]) -> Result<ConfusionMatrix> {
    if preds.len() != truths.len() {
        return Err(Error::contract("predictions and truths differ in length"));
    }
    let mut cm = ConfusionMatrix::zeros(labels.to_vec());
    let k = labels.len();
    for (&p, &t) in preds.iter().zip(truths) {
        if p >= k || t >= k {
            return Err(Error::contract(format!("label index outside 0..{k}")));
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy and macro scores; zero denominators score 0.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::contract("metrics of an empty confusion matrix"));
    }
    let k = cm.n_classes();
    let trace: u64 = (0..k).map(|c| cm.counts[c][c]).sum();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c];
            let predicted: u64 = (0..k).map(|t| cm.counts[t][c]).sum();
            let support: u64 = cm.counts[c].iter().sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassMetrics { precision, recall, f1, support }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    Ok(MetricReport {
        accuracy: ratio(trace, total),
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        per_class,
    })
}

fn deal(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    for (i, &idx) in order.iter().enumerate() {
        folds[i % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Shuffled, unstratified folds whose sizes differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || n < k {
        return Err(Error::contract(format!("cannot split {n} rows into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    Ok(deal(&order, k))
}

/// Each class is shuffled and dealt round-robin, the fold counter carrying
/// over between classes, so class shares match across folds.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = labels.len();
    if k < 2 || n < k {
        return Err(Error::contract(format!("cannot split {n} rows into {k} folds")));
    }
    let mut rng = seed::rng(seed);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut order = Vec::with_capacity(n);
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    Ok(deal(&order, k))
}

/// `|test| = round(fraction · n)` with halves rounded up.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 5 {
        return Err(Error::contract("train/test split needs at least 5 rows"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let n_test = ((test_fraction * n as f64) + 0.5).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub synthetic_rows: usize,
    pub confusion: Option<ConfusionMatrix>,
    pub metrics: Option<MetricReport>,
    pub error: Option<String>,
    /// Original-row parents of the fold's SMOTE rows.
    #[serde(skip)]
    pub smote_parents: Vec<(usize, usize)>,
    /// Held-out row indices.
    #[serde(skip)]
    pub test_indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: 5, stratified: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub variant: Variant,
    pub task: Task,
    pub k: usize,
    pub stratified: bool,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub accuracy: MeanStd,
    pub macro_precision: MeanStd,
    pub macro_recall: MeanStd,
    pub macro_f1: MeanStd,
}

impl CvReport {
    pub fn failed_folds(&self) -> usize {
        self.folds.iter().filter(|f| f.error.is_some()).count()
    }
}

/// Per fold: standardization fit on the training part, optional SMOTE on the
/// training part only, training, and scoring on the held-out part.
pub fn cross_validate(x: &[Vec<f64>], y: &[usize], spec: &TrainSpec, cfg: &CvConfig) -> Result<CvReport> {
    if x.len() != y.len() {
        return Err(Error::contract("rows and labels differ in length"));
    }
    let folds = if cfg.stratified {
        stratified_kfold(y, cfg.k, seed::derive(spec.seed, "split"))?
    } else {
        kfold_split(y.len(), cfg.k, seed::derive(spec.seed, "split"))?
    };
    let labels = spec.task.class_names();
    let results: Vec<FoldResult> = folds
        .par_iter()
        .enumerate()
        .map(|(i, test)| {
            let mut held = vec![false; x.len()];
            for &t in test {
                held[t] = true;
            }
            let train: Vec<usize> = (0..x.len()).filter(|&r| !held[r]).collect();
            let tx: Vec<Vec<f64>> = train.iter().map(|&r| x[r].clone()).collect();
            let ty: Vec<usize> = train.iter().map(|&r| y[r]).collect();
            let fold_spec = TrainSpec { seed: seed::derive(spec.seed, &format!("fold-{i}")), ..spec.clone() };
            let mut result = FoldResult {
                fold: i,
                train_size: train.len(),
                test_size: test.len(),
                synthetic_rows: 0,
                confusion: None,
                metrics: None,
                error: None,
                smote_parents: Vec::new(),
                test_indices: test.clone(),
            };
            let scored = TrainedModel::fit_traced(&tx, &ty, &fold_spec).and_then(|(model, parents)| {
                result.synthetic_rows = parents.len();
                result.smote_parents = parents.iter().map(|&(a, b)| (train[a], train[b])).collect();
                let rows: Vec<&[f64]> = test.iter().map(|&r| x[r].as_slice()).collect();
                let preds = model.predict_all(&rows)?;
                let truths: Vec<usize> = test.iter().map(|&r| y[r]).collect();
                let cm = confusion(&preds, &truths, &labels)?;
                let m = metrics(&cm)?;
                Ok((cm, m))
            });
            match scored {
                Ok((cm, m)) => {
                    result.confusion = Some(cm);
                    result.metrics = Some(m);
                }
                Err(e) => result.error = Some(e.to_string()),
            }
            result
        })
        .collect();
    let ok: Vec<&MetricReport> = results.iter().filter_map(|f| f.metrics.as_ref()).collect();
    if ok.is_empty() {
        let first = results.iter().find_map(|f| f.error.clone()).unwrap_or_default();
        return Err(Error::contract(format!("every fold failed: {first}")));
    }
    let summary = |f: fn(&MetricReport) -> f64| MeanStd::of(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
    Ok(CvReport {
        variant: spec.variant,
        task: spec.task,
        k: cfg.k,
        stratified: cfg.stratified,
        seed: spec.seed,
        accuracy: summary(|m| m.accuracy),
        macro_precision: summary(|m| m.macro_precision),
        macro_recall: summary(|m| m.macro_recall),
        macro_f1: summary(|m| m.macro_f1),
        folds: results,
    })
}

/// Metrics as rows, models as columns, cells as `mean ± std`.
pub fn render_table(reports: &[CvReport]) -> String {
    let rows: [(&str, fn(&CvReport) -> MeanStd); 4] = [
        ("Accuracy", |r| r.accuracy),
        ("Macro Precision", |r| r.macro_precision),
        ("Macro Recall", |r| r.macro_recall),
        ("Macro F1 Score", |r| r.macro_f1),
    ];
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("Metric".to_string())
        .chain(reports.iter().map(|r| r.variant.display_name().to_string()))
        .collect()];
    for (name, get) in rows {
        let mut line = vec![name.to_string()];
        line.extend(reports.iter().map(|r| {
            let v = get(r);
            format!("{:.3} ± {:.3}", v.mean, v.std)
        }));
        grid.push(line);
    }
    let widths: Vec<usize> =
        (0..grid[0].len()).map(|c| grid.iter().map(|row| row[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in grid.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}
