//! Repeated randomized holdout evaluation and the three experiment drivers.

mod drivers;
mod report;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvefit::r_squared;
use crate::error::{Error, Result};
use crate::models::{train, Dataset, Hyperparams, LearnerKind, Target, MIN_SAMPLES};
use crate::rng::{derive_seed, rng_from};

pub use drivers::{
    features_dataset, leakage_canary, run_model1, run_model2, run_model3, shuffled_labels,
    GroupSelection, Model2Samples, NULL_MODEL,
};
pub use report::{write_reports_csv, write_reports_json, EvalReport, MeanStd, RepeatMetrics, ReportFile};

/// How samples are assigned to train and test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Individual samples; a surface can appear on both sides.
    Sample,
    /// Whole surfaces are held out.
    SurfaceHeldOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Protocol {
    pub train_fraction: f64,
    pub repeats: usize,
    /// Stratify classification splits by class.
    pub stratified: bool,
    pub base_seed: u64,
    pub split_mode: SplitMode,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            repeats: 100,
            stratified: true,
            base_seed: 0,
            split_mode: SplitMode::Sample,
        }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must be in (0, 1)".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        Ok(())
    }

    pub fn split_seed(&self, repeat: usize) -> u64 {
        derive_seed(self.base_seed, repeat as u64)
    }

    /// Seed handed to the learner in a given repeat.
    pub fn model_seed(&self, repeat: usize) -> u64 {
        derive_seed(self.split_seed(repeat), 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn test_count(n: usize, train_fraction: f64) -> usize {
    // Guard the product against rounding up by one ulp (0.2·100 → 20.000000000000004).
    let raw = (1.0 - train_fraction) * n as f64;
    let t = (raw - 1e-9).ceil().max(1.0) as usize;
    t.min(n - 1)
}

/// Seeded holdout split of `0..n`.
///
/// With `labels` and `protocol.stratified`, each class contributes
/// `round((1 - f)·n_c)` test samples, clamped to `[1, n_c - 1]`. With
/// `groups` and surface-held-out mode, groups are split instead of samples.
pub fn split(
    n: usize,
    labels: Option<&[usize]>,
    groups: Option<&[u32]>,
    protocol: &Protocol,
    repeat: usize,
) -> Result<Split> {
    protocol.validate()?;
    if n < 2 {
        return Err(Error::invalid("cannot split fewer than 2 samples"));
    }
    let mut rng = rng_from(protocol.split_seed(repeat));
    let labels = labels.filter(|_| protocol.stratified);
    let mut test = match (protocol.split_mode, groups) {
        (SplitMode::SurfaceHeldOut, Some(groups)) => {
            // One unit per group; its label is the label of its first member.
            let mut units: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for (i, g) in groups.iter().enumerate() {
                units.entry(*g).or_default().push(i);
            }
            let keys: Vec<u32> = units.keys().copied().collect();
            let unit_labels: Option<Vec<usize>> = labels.map(|l| keys.iter().map(|k| l[units[k][0]]).collect());
            let picked = pick_test(keys.len(), unit_labels.as_deref(), protocol.train_fraction, &mut rng)?;
            picked.into_iter().flat_map(|u| units[&keys[u]].clone()).collect()
        }
        (SplitMode::SurfaceHeldOut, None) => {
            return Err(Error::Config("surface-held-out split needs surface ids".into()));
        }
        (SplitMode::Sample, _) => pick_test(n, labels, protocol.train_fraction, &mut rng)?,
    };
    test.sort_unstable();
    let mut is_test = vec![false; n];
    for &i in &test {
        is_test[i] = true;
    }
    let train = (0..n).filter(|&i| !is_test[i]).collect();
    Ok(Split { train, test })
}

fn pick_test(n: usize, labels: Option<&[usize]>, f: f64, rng: &mut crate::rng::Rng) -> Result<Vec<usize>> {
    match labels {
        None => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            idx.truncate(test_count(n, f));
            Ok(idx)
        }
        Some(labels) => {
            let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, &l) in labels.iter().enumerate() {
                by_class.entry(l).or_default().push(i);
            }
            let mut test = Vec::new();
            for (class, mut members) in by_class {
                let nc = members.len();
                if nc < 2 {
                    return Err(Error::invalid(format!(
                        "class {class} has {nc} sample(s); stratified splits need at least 2"
                    )));
                }
                let k = (((1.0 - f) * nc as f64).round() as usize).clamp(1, nc - 1);
                members.shuffle(rng);
                test.extend_from_slice(&members[..k]);
            }
            Ok(test)
        }
    }
}

pub(crate) fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

pub(crate) fn mse(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / truth.len() as f64
}

/// R² on test targets; 0 when the test targets are constant.
pub(crate) fn r2_or_zero(truth: &[f64], pred: &[f64]) -> f64 {
    r_squared(truth, pred).unwrap_or(0.0)
}

/// Evaluate one learner under the protocol. Repeats run in parallel; each
/// derives its split and model seeds from `(base_seed, repeat)`.
pub fn evaluate(
    data: &Dataset,
    groups: Option<&[u32]>,
    kind: LearnerKind,
    hp: &Hyperparams,
    protocol: &Protocol,
    task: &str,
) -> Result<EvalReport> {
    protocol.validate()?;
    if data.n() < MIN_SAMPLES {
        return Err(Error::invalid(format!("evaluation needs at least {MIN_SAMPLES} samples")));
    }
    let per_repeat: Vec<RepeatMetrics> = (0..protocol.repeats)
        .into_par_iter()
        .map(|rep| -> Result<RepeatMetrics> {
            let s = split(data.n(), data.labels(), groups, protocol, rep)?;
            let tr = data.rows(&s.train);
            let te = data.rows(&s.test);
            let seed = protocol.model_seed(rep);
            let model = train(kind, hp, &tr, seed)?;
            let mut values = BTreeMap::new();
            match (&te.target, &tr.target) {
                (Target::Classes { labels, .. }, Target::Classes { labels: train_labels, .. }) => {
                    values.insert("accuracy".into(), accuracy(&model.predict_class(&te.x)?, labels));
                    values.insert("train_accuracy".into(), accuracy(&model.predict_class(&tr.x)?, train_labels));
                }
                (Target::Values(y), _) => {
                    let pred = model.predict(&te.x)?;
                    values.insert("mse".into(), mse(&pred, y));
                    values.insert("r2".into(), r2_or_zero(y, &pred));
                }
                _ => unreachable!("train and test share the target type"),
            }
            Ok(RepeatMetrics { repeat: rep, split_seed: protocol.split_seed(rep), model_seed: seed, values })
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport::new(task, kind.name(), protocol, hp, data.p(), per_repeat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eighty_twenty() {
        let p = Protocol { stratified: false, ..Default::default() };
        let s = split(100, None, None, &p, 0).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (80, 20));
    }

    #[test]
    fn split_is_reproducible() {
        let p = Protocol::default();
        assert_eq!(split(57, None, None, &p, 3).unwrap(), split(57, None, None, &p, 3).unwrap());
        assert_ne!(split(57, None, None, &p, 3).unwrap(), split(57, None, None, &p, 4).unwrap());
    }

    #[test]
    fn stratified_ten_by_ten() {
        let labels: Vec<usize> = (0..100).map(|i| i / 10).collect();
        let s = split(100, Some(&labels), None, &Protocol::default(), 9).unwrap();
        for c in 0..10 {
            assert_eq!(s.test.iter().filter(|&&i| labels[i] == c).count(), 2);
            assert_eq!(s.train.iter().filter(|&&i| labels[i] == c).count(), 8);
        }
    }

    #[test]
    fn singleton_class_rejected() {
        let labels = [0, 0, 0, 1, 1, 2];
        assert!(split(6, Some(&labels), None, &Protocol::default(), 0).is_err());
    }

    #[test]
    fn surfaces_held_out() {
        let groups: Vec<u32> = (0..100).map(|i| (i / 2) as u32).collect();
        let labels: Vec<usize> = (0..100).map(|i| i / 10).collect();
        let p = Protocol { split_mode: SplitMode::SurfaceHeldOut, ..Default::default() };
        let s = split(100, Some(&labels), Some(&groups), &p, 1).unwrap();
        let test_groups: std::collections::BTreeSet<u32> = s.test.iter().map(|&i| groups[i]).collect();
        assert!(s.train.iter().all(|i| !test_groups.contains(&groups[*i])));
        assert_eq!(test_groups.len(), 10);
    }

    proptest! {
        #[test]
        fn split_partitions(n in 2usize..300, rep in 0usize..50, seed in any::<u64>()) {
            let p = Protocol { base_seed: seed, stratified: false, ..Default::default() };
            let s = split(n, None, None, &p, rep).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert!(!s.test.is_empty() && !s.train.is_empty());
        }
    }
}
