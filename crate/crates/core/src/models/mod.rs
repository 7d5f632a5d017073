//! Supervised learners: random forests, k-nearest neighbours, Gaussian naive
//! Bayes and multinomial logistic regression, plus standardization.

mod bayes;
mod forest;
mod knn;
mod logistic;
mod standardize;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bayes::GaussianNb;
pub use forest::{Node, Tree};
pub use logistic::Logistic;
pub use standardize::Standardizer;

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    RfClassifier,
    RfRegressor,
    Knn,
    GaussianNb,
    Logistic,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 5] = [
        LearnerKind::RfClassifier,
        LearnerKind::RfRegressor,
        LearnerKind::Knn,
        LearnerKind::GaussianNb,
        LearnerKind::Logistic,
    ];

    pub const CLASSIFIERS: [LearnerKind; 4] = [
        LearnerKind::RfClassifier,
        LearnerKind::Knn,
        LearnerKind::GaussianNb,
        LearnerKind::Logistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::RfClassifier => "rf_classifier",
            LearnerKind::RfRegressor => "rf_regressor",
            LearnerKind::Knn => "knn",
            LearnerKind::GaussianNb => "gaussian_nb",
            LearnerKind::Logistic => "logistic",
        }
    }

    pub fn is_classifier(self) -> bool {
        self != LearnerKind::RfRegressor
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    pub n_trees: usize,
    /// Features tried per split; `None` means √p (classification) or p/3 (regression).
    pub max_features: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub knn_k: usize,
    pub nb_var_floor: f64,
    pub logistic_l2: f64,
    pub logistic_tol: f64,
    pub logistic_max_iter: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            n_trees: 300,
            max_features: None,
            min_leaf: 1,
            max_depth: None,
            knn_k: 5,
            nb_var_floor: 1e-9,
            logistic_l2: 1.0,
            logistic_tol: 1e-6,
            logistic_max_iter: 1000,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.min_leaf == 0 || self.knn_k == 0 {
            return Err(Error::Config("n_trees, min_leaf and knn_k must be positive".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::Config("max_features must be positive".into()));
        }
        if !(self.nb_var_floor > 0.0 && self.logistic_l2 >= 0.0 && self.logistic_tol > 0.0) {
            return Err(Error::Config("invalid naive Bayes or logistic settings".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Real-valued targets.
    Values(Vec<f64>),
    /// Class indices in `0..n_classes`.
    Classes { labels: Vec<usize>, n_classes: usize },
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Values(v) => v.len(),
            Target::Classes { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, rows: &[usize]) -> Self {
        match self {
            Target::Values(v) => Target::Values(rows.iter().map(|&i| v[i]).collect()),
            Target::Classes { labels, n_classes } => Target::Classes {
                labels: rows.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
            },
        }
    }
}

/// Row-major feature matrix with named columns and a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub target: Target,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, target: Target, feature_names: Vec<String>) -> Result<Self> {
        let d = Self { x, target, feature_names };
        d.check()?;
        if d.n() < MIN_SAMPLES {
            return Err(Error::invalid(format!("dataset needs at least {MIN_SAMPLES} samples, got {}", d.n())));
        }
        Ok(d)
    }

    fn check(&self) -> Result<()> {
        let p = self.feature_names.len();
        if p == 0 {
            return Err(Error::invalid("dataset has no features"));
        }
        if self.target.len() != self.x.len() {
            return Err(Error::invalid("feature rows and targets differ in count"));
        }
        if self.x.iter().any(|r| r.len() != p) {
            return Err(Error::invalid("row length differs from feature count"));
        }
        if self.x.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        match &self.target {
            Target::Values(v) if v.iter().any(|t| !t.is_finite()) => {
                Err(Error::invalid("non-finite target value"))
            }
            Target::Classes { labels, n_classes } if labels.iter().any(|l| l >= n_classes) => {
                Err(Error::invalid("class label out of range"))
            }
            _ => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn p(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows in the given order (duplicates allowed).
    pub fn rows(&self, rows: &[usize]) -> Self {
        Self {
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            target: self.target.select(rows),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Keep only the named columns, in the given order.
    pub fn columns(&self, names: &[&str]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::invalid(format!("unknown feature '{n}'")))
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(self.column_indices(&idx))
    }

    pub fn column_indices(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            target: self.target.clone(),
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
        }
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match &self.target {
            Target::Classes { labels, .. } => Some(labels),
            Target::Values(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum Learned {
    Forest { trees: Vec<Tree>, importance: Vec<f64> },
    Knn { train: Vec<Vec<f64>>, labels: Vec<usize>, k: usize },
    GaussianNb(GaussianNb),
    Logistic(Logistic),
}

/// A trained model with everything needed to predict and to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: LearnerKind,
    pub seed: u64,
    pub hyperparams: Hyperparams,
    /// Feature names in caller column order.
    pub feature_names: Vec<String>,
    /// Column permutation applied before the learner (name order for forests).
    pub column_order: Vec<usize>,
    pub standardizer: Standardizer,
    /// Training label set, mapped to compact learner classes `0..classes.len()`.
    pub classes: Vec<usize>,
    pub learned: Learned,
}

/// Train a model. Forests sort columns by feature name first, so permuting
/// columns together with their names leaves the forest unchanged.
pub fn train(kind: LearnerKind, hp: &Hyperparams, data: &Dataset, seed: u64) -> Result<TrainedModel> {
    hp.validate()?;
    data.check()?;
    if data.n() < 2 {
        return Err(Error::Model("need at least 2 training samples".into()));
    }
    let p = data.p();
    let standardizer = Standardizer::fit(&data.x)?;
    let mut column_order: Vec<usize> = (0..p).collect();
    if matches!(kind, LearnerKind::RfClassifier | LearnerKind::RfRegressor) {
        column_order.sort_by(|&a, &b| data.feature_names[a].cmp(&data.feature_names[b]).then(a.cmp(&b)));
    }

    let (classes, compact) = match (&data.target, kind.is_classifier()) {
        (Target::Classes { labels, .. }, true) => {
            let set: BTreeSet<usize> = labels.iter().copied().collect();
            let classes: Vec<usize> = set.into_iter().collect();
            for &c in &classes {
                let count = labels.iter().filter(|&&l| l == c).count();
                if count < 2 {
                    return Err(Error::Model(format!("class {c} has {count} training sample(s); need 2")));
                }
            }
            let compact: Vec<usize> = labels.iter().map(|l| classes.binary_search(l).expect("present")).collect();
            (classes, compact)
        }
        (Target::Values(_), false) => (Vec::new(), Vec::new()),
        _ => return Err(Error::Model(format!("{kind} does not match the target type"))),
    };
    let k_classes = classes.len();
    let prepared = |standardize: bool| -> Vec<Vec<f64>> {
        data.x
            .iter()
            .map(|r| {
                let r = if standardize { standardizer.apply_row(r) } else { r.clone() };
                column_order.iter().map(|&j| r[j]).collect()
            })
            .collect()
    };

    let learned = match kind {
        LearnerKind::RfClassifier | LearnerKind::RfRegressor => {
            let x = prepared(false);
            let (task, y, default_mtry) = if kind == LearnerKind::RfClassifier {
                let y: Vec<f64> = compact.iter().map(|&c| c as f64).collect();
                (forest::Task::Classify { n_classes: k_classes }, y, ((p as f64).sqrt().floor() as usize).max(1))
            } else {
                let Target::Values(v) = &data.target else { unreachable!() };
                (forest::Task::Regress, v.clone(), (p / 3).max(1))
            };
            let params = forest::TreeParams {
                max_features: hp.max_features.unwrap_or(default_mtry).min(p),
                min_leaf: hp.min_leaf,
                max_depth: hp.max_depth,
            };
            let trees = forest::grow_forest(&x, &y, task, hp.n_trees, &params, seed);
            let importance = forest::mdi(&trees, p);
            Learned::Forest { trees, importance }
        }
        LearnerKind::Knn => {
            if data.n() < hp.knn_k {
                return Err(Error::Model(format!("kNN with k={} needs at least k samples, got {}", hp.knn_k, data.n())));
            }
            Learned::Knn { train: prepared(true), labels: compact, k: hp.knn_k }
        }
        LearnerKind::GaussianNb => Learned::GaussianNb(GaussianNb::fit(&prepared(false), &compact, k_classes, hp.nb_var_floor)),
        LearnerKind::Logistic => Learned::Logistic(logistic::fit_logistic(
            &prepared(true),
            &compact,
            k_classes,
            hp.logistic_l2,
            hp.logistic_tol,
            hp.logistic_max_iter,
        )),
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        seed,
        hyperparams: hp.clone(),
        feature_names: data.feature_names.clone(),
        column_order,
        standardizer,
        classes,
        learned,
    })
}

fn argmax(v: &[f64]) -> usize {
    (1..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

impl TrainedModel {
    fn prepare(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.feature_names.len() {
            return Err(Error::Model(format!(
                "expected {} features, got {}",
                self.feature_names.len(),
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite feature value".into()));
        }
        let standardized = matches!(self.learned, Learned::Knn { .. } | Learned::Logistic(_));
        let r = if standardized { self.standardizer.apply_row(row) } else { row.to_vec() };
        Ok(self.column_order.iter().map(|&j| r[j]).collect())
    }

    /// Class probabilities over [`TrainedModel::classes`] (not defined for kNN).
    pub fn predict_proba(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter()
            .map(|row| {
                let r = self.prepare(row)?;
                match &self.learned {
                    Learned::Forest { trees, .. } if self.kind == LearnerKind::RfClassifier => {
                        let mut acc = vec![0.0; self.classes.len()];
                        for t in trees {
                            for (a, v) in acc.iter_mut().zip(t.leaf_value(&r)) {
                                *a += v;
                            }
                        }
                        Ok(acc.iter().map(|a| a / trees.len() as f64).collect())
                    }
                    Learned::GaussianNb(nb) => Ok(nb.posterior(&r)),
                    Learned::Logistic(lr) => Ok(lr.probabilities(&r)),
                    _ => Err(Error::Model(format!("{} has no class probabilities", self.kind))),
                }
            })
            .collect()
    }

    /// Predicted class labels, drawn from the training label set.
    pub fn predict_class(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        if !self.kind.is_classifier() {
            return Err(Error::Model(format!("{} is not a classifier", self.kind)));
        }
        if let Learned::Knn { train, labels, k } = &self.learned {
            return x
                .iter()
                .map(|row| {
                    let r = self.prepare(row)?;
                    Ok(self.classes[knn::knn_vote(train, labels, *k, &r, self.classes.len())])
                })
                .collect();
        }
        let compact: Vec<usize> = match &self.learned {
            Learned::GaussianNb(nb) => x
                .iter()
                .map(|row| self.prepare(row).map(|r| argmax(&nb.joint_log_likelihood(&r))))
                .collect::<Result<_>>()?,
            _ => self.predict_proba(x)?.iter().map(|p| argmax(p)).collect(),
        };
        Ok(compact.into_iter().map(|c| self.classes[c]).collect())
    }

    /// Regression output (forest regressors only).
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        let Learned::Forest { trees, .. } = &self.learned else {
            return Err(Error::Model(format!("{} is not a regressor", self.kind)));
        };
        if self.kind != LearnerKind::RfRegressor {
            return Err(Error::Model(format!("{} is not a regressor", self.kind)));
        }
        x.iter()
            .map(|row| {
                let r = self.prepare(row)?;
                Ok(trees.iter().map(|t| t.leaf_value(&r)[0]).sum::<f64>() / trees.len() as f64)
            })
            .collect()
    }

    /// Mean decrease in impurity, descending, ties by name.
    pub fn feature_importance(&self) -> Result<ImportanceRanking> {
        let Learned::Forest { importance, .. } = &self.learned else {
            return Err(Error::Model(format!("{} has no impurity importance", self.kind)));
        };
        let entries = self
            .column_order
            .iter()
            .zip(importance)
            .map(|(&j, &v)| (self.feature_names[j].clone(), v))
            .collect();
        Ok(ImportanceRanking::new(entries))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema {
                context: path.display().to_string(),
                message: format!("unsupported model format version {}", m.format_version),
            });
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub entries: Vec<(String, f64)>,
}

impl ImportanceRanking {
    pub fn new(mut entries: Vec<(String, f64)>) -> Self {
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self { entries }
    }

    /// Average several rankings feature-wise and re-rank.
    pub fn mean(rankings: &[ImportanceRanking]) -> Self {
        let mut acc: std::collections::BTreeMap<&str, f64> = Default::default();
        for r in rankings {
            for (n, v) in &r.entries {
                *acc.entry(n).or_default() += v / rankings.len() as f64;
            }
        }
        Self::new(acc.into_iter().map(|(n, v)| (n.to_string(), v)).collect())
    }

    pub fn top(&self, k: usize) -> Vec<&str> {
        self.entries.iter().take(k).map(|(n, _)| n.as_str()).collect()
    }
}
