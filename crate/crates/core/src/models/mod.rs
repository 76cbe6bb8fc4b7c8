//! From-scratch classifiers behind one train/predict contract.

mod forest;
mod logreg;
mod mlp;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{Standardization, Task};
use crate::sampling::{smote, SmoteConfig};
use crate::seed;

pub use forest::{bootstrap_sample, gini_impurity, grow_tree, train_forest, ForestConfig, ForestParams, Node, Tree};
pub use logreg::{train_logreg, train_logreg_traced, LogRegConfig, LogRegParams};
pub use mlp::{mlp_backprop_gradients, train_mlp, MlpConfig, MlpParams};
pub use svm::{dual_objective, rbf, svm_decision, train_svm, SvmConfig, SvmParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "mlp")]
    Mlp,
    #[serde(rename = "logreg")]
    LogReg,
    #[serde(rename = "svm")]
    SvmRbf,
    #[serde(rename = "rf")]
    RandomForest,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Mlp, Variant::LogReg, Variant::SvmRbf, Variant::RandomForest];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Mlp => "mlp",
            Variant::LogReg => "logreg",
            Variant::SvmRbf => "svm",
            Variant::RandomForest => "rf",
        }
    }

    /// Row label used in evaluation tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Variant::Mlp => "MLNN",
            Variant::LogReg => "LR",
            Variant::SvmRbf => "SVM",
            Variant::RandomForest => "RF",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mlp" | "mlnn" => Ok(Variant::Mlp),
            "logreg" | "lr" => Ok(Variant::LogReg),
            "svm" => Ok(Variant::SvmRbf),
            "rf" | "forest" => Ok(Variant::RandomForest),
            other => Err(Error::Config(format!("unknown model {other:?} (expected mlp, logreg, svm or rf)"))),
        }
    }
}

/// Hyperparameters for every variant; only the selected one is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub mlp: MlpConfig,
    pub logreg: LogRegConfig,
    pub svm: SvmConfig,
    pub forest: ForestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum Params {
    Mlp(MlpParams),
    #[serde(rename = "logreg")]
    LogReg(LogRegParams),
    Svm(SvmParams),
    /// One binary machine per class, class `k` against the rest.
    #[serde(rename = "svm_ovr")]
    SvmOvr { machines: Vec<SvmParams> },
    #[serde(rename = "rf")]
    Forest(ForestParams),
}

impl Params {
    pub fn variant(&self) -> Variant {
        match self {
            Params::Mlp(_) => Variant::Mlp,
            Params::LogReg(_) => Variant::LogReg,
            Params::Svm(_) | Params::SvmOvr { .. } => Variant::SvmRbf,
            Params::Forest(_) => Variant::RandomForest,
        }
    }

    /// Per-class scores for one standardized row.
    pub fn predict_proba(&self, z: &[f64]) -> Vec<f64> {
        match self {
            Params::Mlp(p) => p.predict_proba(z),
            Params::LogReg(p) => p.predict_proba(z),
            Params::Svm(p) => p.predict_proba(z),
            Params::SvmOvr { machines } => {
                let s: Vec<f64> = machines.iter().map(|m| m.predict_proba(z)[1]).collect();
                let total: f64 = s.iter().sum();
                if total > 0.0 {
                    s.iter().map(|v| v / total).collect()
                } else {
                    vec![1.0 / s.len() as f64; s.len()]
                }
            }
            Params::Forest(p) => p.predict_proba(z),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Params::Mlp(p) => p.n_classes(),
            Params::LogReg(p) => p.n_classes(),
            Params::Svm(_) => 2,
            Params::SvmOvr { machines } => machines.len(),
            Params::Forest(p) => p.n_classes,
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Params::Mlp(p) => p.flatten().iter().all(|v| v.is_finite()),
            Params::LogReg(p) => p.weights.iter().flatten().chain(&p.bias).all(|v| v.is_finite()),
            Params::Svm(p) => svm_is_finite(p),
            Params::SvmOvr { machines } => machines.iter().all(svm_is_finite),
            Params::Forest(p) => p.trees.iter().flat_map(|t| &t.nodes).all(|n| match n {
                Node::Split { threshold, .. } => threshold.is_finite(),
                Node::Leaf { .. } => true,
            }),
        }
    }
}

fn svm_is_finite(p: &SvmParams) -> bool {
    p.support.iter().flatten().chain(&p.dual_coef).all(|v| v.is_finite()) && p.bias.is_finite() && p.prob_scale.is_finite()
}

/// Index of the largest score; ties go to the lower index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Fits one variant on standardized rows.
pub fn train(variant: Variant, z: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &ModelConfig, seed: u64) -> Result<Params> {
    check_training_set(z, y, n_classes)?;
    Ok(match variant {
        Variant::Mlp => Params::Mlp(train_mlp(z, y, n_classes, &cfg.mlp, seed)?),
        Variant::LogReg => Params::LogReg(train_logreg(z, y, n_classes, &cfg.logreg)?),
        Variant::SvmRbf if n_classes == 2 => Params::Svm(train_svm(z, y, &cfg.svm, seed)?),
        Variant::SvmRbf => {
            let machines = (0..n_classes)
                .map(|k| {
                    let yk: Vec<usize> = y.iter().map(|&c| usize::from(c == k)).collect();
                    train_svm(z, &yk, &cfg.svm, seed::derive(seed, &format!("class-{k}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Params::SvmOvr { machines }
        }
        Variant::RandomForest => Params::Forest(train_forest(z, y, n_classes, &cfg.forest, seed)?),
    })
}

fn check_training_set(z: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<()> {
    if z.len() != y.len() || z.is_empty() {
        return Err(Error::contract("training rows and labels must be non-empty and aligned"));
    }
    let d = z[0].len();
    if z.iter().any(|r| r.len() != d || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::contract("training rows must be finite and equally wide"));
    }
    if y.iter().any(|&c| c >= n_classes) {
        return Err(Error::contract("label outside the class range"));
    }
    let distinct = (0..n_classes).filter(|c| y.contains(c)).count();
    if distinct < 2 {
        return Err(Error::contract("training data contains a single class"));
    }
    Ok(())
}

/// Training recipe shared by the CLI, evaluation and the FFI layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub variant: Variant,
    pub task: Task,
    pub config: ModelConfig,
    /// Balance the training rows with SMOTE (binary task only).
    pub smote: Option<usize>,
    pub seed: u64,
}

/// A fitted model with its frozen standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub task: Task,
    pub class_labels: Vec<String>,
    pub standardization: Standardization,
    pub params: Params,
    pub spec: TrainSpec,
    /// Large-fire threshold used to label the training table, if dynamic.
    pub fire_threshold: Option<f64>,
    /// Free-form run description (config echo).
    pub metadata: serde_json::Value,
    /// Hex SHA-256 over the document with this field empty.
    pub content_hash: String,
}

impl TrainedModel {
    /// Standardizes raw rows with training statistics, optionally balances
    /// them, and fits the variant.
    pub fn fit(raw: &[Vec<f64>], y: &[usize], spec: &TrainSpec) -> Result<Self> {
        Ok(Self::fit_traced(raw, y, spec)?.0)
    }

    /// As [`TrainedModel::fit`], also returning the input-row parents of each
    /// SMOTE synthetic row.
    pub fn fit_traced(raw: &[Vec<f64>], y: &[usize], spec: &TrainSpec) -> Result<(Self, Vec<(usize, usize)>)> {
        let n_classes = spec.task.class_names().len();
        let standardization = Standardization::fit(raw)?;
        let mut z = standardization.apply_all(raw);
        let mut labels = y.to_vec();
        let mut parents = Vec::new();
        if let Some(k) = spec.smote {
            if spec.task != Task::Dynamic {
                return Err(Error::Config("SMOTE applies to the binary task only".into()));
            }
            let out = smote(&z, &labels, &SmoteConfig { k_neighbors: k, seed: seed::derive(spec.seed, "smote") })?;
            z = out.x;
            labels = out.y;
            parents = out.parents;
        }
        let params = train(spec.variant, &z, &labels, n_classes, &spec.config, seed::derive(spec.seed, "model"))?;
        Ok((Self::assemble(spec.clone(), standardization, params), parents))
    }

    pub fn assemble(spec: TrainSpec, standardization: Standardization, params: Params) -> Self {
        let mut m = Self {
            format_version: MODEL_FORMAT_VERSION,
            task: spec.task,
            class_labels: spec.task.class_names(),
            standardization,
            params,
            spec,
            fire_threshold: None,
            metadata: serde_json::Value::Null,
            content_hash: String::new(),
        };
        m.rehash();
        m
    }

    pub fn variant(&self) -> Variant {
        self.params.variant()
    }

    pub fn compute_hash(&self) -> String {
        let mut unhashed = self.clone();
        unhashed.content_hash.clear();
        let bytes = serde_json::to_vec(&unhashed).expect("model serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Recomputes the content hash after editing metadata.
    pub fn rehash(&mut self) {
        self.content_hash = self.compute_hash();
    }

    fn check_row(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.standardization.width() {
            return Err(Error::contract(format!("expected {} features, got {}", self.standardization.width(), x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("non-finite input feature"));
        }
        Ok(())
    }

    /// Scores for an already standardized row.
    pub fn predict_proba_standardized(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_row(z)?;
        Ok(self.params.predict_proba(z))
    }

    /// Scores for a row in raw units.
    pub fn predict_proba(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.check_row(raw)?;
        Ok(self.params.predict_proba(&self.standardization.apply(raw)))
    }

    pub fn predict(&self, raw: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(raw)?))
    }

    pub fn predict_all<R: AsRef<[f64]> + Sync>(&self, rows: &[R]) -> Result<Vec<usize>> {
        use rayon::prelude::*;
        rows.par_iter().map(|r| self.predict(r.as_ref())).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a model document, rejecting unknown versions and hash mismatches.
    pub fn from_json(text: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported model format version {}", m.format_version)));
        }
        if m.class_labels.is_empty() || m.class_labels.len() != m.params.n_classes() {
            return Err(Error::Format("model class labels do not match its parameters".into()));
        }
        if !m.params.is_finite() {
            return Err(Error::Format("model parameters must be finite".into()));
        }
        let expected = m.compute_hash();
        if expected != m.content_hash {
            return Err(Error::Format(format!("model content hash mismatch (stored {}, computed {expected})", m.content_hash)));
        }
        Ok(m)
    }
}
