use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{accuracy, evaluate, mse, r2_or_zero, split, EvalReport, Protocol, RepeatMetrics};
use crate::analysis::null_model;
use crate::dataio::{AdjectivePair, MaterialClass, RatingMatrix};
use crate::error::{Error, Result};
use crate::extract::{feature_names, group_indices, FeatureGroup, FeatureVector, N_FEATURES};
use crate::models::{train, Dataset, Hyperparams, LearnerKind, Target};
use crate::rng::{child_rng, rng_from};

/// Model name used for the uniform-prediction baseline rows.
pub const NULL_MODEL: &str = "null_uniform";

/// A feature group, or the full registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSelection {
    Pressing,
    Thermal,
    Sliding,
    All,
}

impl GroupSelection {
    pub const ALL: [GroupSelection; 4] = [
        GroupSelection::Pressing,
        GroupSelection::Thermal,
        GroupSelection::Sliding,
        GroupSelection::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupSelection::Pressing => "pressing",
            GroupSelection::Thermal => "thermal",
            GroupSelection::Sliding => "sliding",
            GroupSelection::All => "all",
        }
    }

    pub fn group(self) -> Option<FeatureGroup> {
        match self {
            GroupSelection::Pressing => Some(FeatureGroup::Pressing),
            GroupSelection::Thermal => Some(FeatureGroup::Thermal),
            GroupSelection::Sliding => Some(FeatureGroup::Sliding),
            GroupSelection::All => None,
        }
    }

    pub fn columns(self) -> Vec<usize> {
        match self.group() {
            Some(g) => group_indices(g),
            None => (0..N_FEATURES).collect(),
        }
    }
}

impl fmt::Display for GroupSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature group '{s}'")))
    }
}

/// Material-classification dataset over the selected feature columns, with
/// each sample's surface id for surface-held-out splits.
pub fn features_dataset(vectors: &[FeatureVector], selection: GroupSelection) -> Result<(Dataset, Vec<u32>)> {
    let cols = selection.columns();
    let names = feature_names();
    let x = vectors.iter().map(|v| cols.iter().map(|&j| v.values[j]).collect()).collect();
    let labels = vectors.iter().map(|v| v.material.index()).collect();
    let d = Dataset::new(
        x,
        Target::Classes { labels, n_classes: MaterialClass::ALL.len() },
        cols.iter().map(|&j| names[j].clone()).collect(),
    )?;
    Ok((d, vectors.iter().map(|v| v.surface_id).collect()))
}

/// Model 1: one forest regressor per adjective pair, predicting the
/// surface's averaged rating from its features, plus a uniform baseline.
pub fn run_model1(
    vectors: &[FeatureVector],
    ratings: &RatingMatrix,
    protocol: &Protocol,
    selection: GroupSelection,
    hp: &Hyperparams,
) -> Result<Vec<EvalReport>> {
    let (base, groups) = features_dataset(vectors, selection)?;
    let rows = vectors
        .iter()
        .map(|v| {
            ratings
                .averaged_for(v.surface_id)
                .ok_or_else(|| Error::Ratings(format!("surface {} has no averaged rating", v.surface_id)))
        })
        .collect::<Result<Vec<[f64; 5]>>>()?;
    let mut out = Vec::new();
    for pair in AdjectivePair::ALL {
        let y: Vec<f64> = rows.iter().map(|r| r[pair.index()]).collect();
        let data = Dataset { target: Target::Values(y.clone()), ..base.clone() };
        let task = format!("model1/{}/{}", pair.name(), selection.name());
        out.push(evaluate(&data, Some(&groups), LearnerKind::RfRegressor, hp, protocol, &task)?);
        out.push(null_baseline(&y, &groups, protocol, hp, &task)?);
    }
    Ok(out)
}

fn null_baseline(y: &[f64], groups: &[u32], protocol: &Protocol, hp: &Hyperparams, task: &str) -> Result<EvalReport> {
    let per_repeat = (0..protocol.repeats)
        .map(|rep| -> Result<RepeatMetrics> {
            let s = split(y.len(), None, Some(groups), protocol, rep)?;
            let truth: Vec<f64> = s.test.iter().map(|&i| y[i]).collect();
            let pred = null_model(truth.len(), protocol.model_seed(rep))?;
            let mut values = BTreeMap::new();
            values.insert("mse".to_string(), mse(&pred, &truth));
            values.insert("r2".to_string(), r2_or_zero(&truth, &pred));
            Ok(RepeatMetrics {
                repeat: rep,
                split_seed: protocol.split_seed(rep),
                model_seed: protocol.model_seed(rep),
                values,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport::new(task, NULL_MODEL, protocol, hp, 0, per_repeat))
}

/// What Model 2 treats as a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model2Samples {
    /// One sample per surface: the averaged ratings.
    Surfaces,
    /// One sample per (participant, surface): that participant's normalized ratings.
    ParticipantSurfaces,
}

/// Model 2: classify material from the five sensation ratings.
pub fn run_model2(
    ratings: &RatingMatrix,
    materials: &BTreeMap<u32, MaterialClass>,
    samples: Model2Samples,
    protocol: &Protocol,
    kinds: &[LearnerKind],
    hp: &Hyperparams,
) -> Result<Vec<EvalReport>> {
    let label_of = |sid: u32| {
        materials
            .get(&sid)
            .map(|m| m.index())
            .ok_or_else(|| Error::Ratings(format!("surface {sid} has no material label")))
    };
    let mut x = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    match samples {
        Model2Samples::Surfaces => {
            for (row, &sid) in ratings.averaged.iter().zip(&ratings.surfaces) {
                x.push(row.to_vec());
                labels.push(label_of(sid)?);
                groups.push(sid);
            }
        }
        Model2Samples::ParticipantSurfaces => {
            for rows in ratings.per_participant.values() {
                for (row, &sid) in rows.iter().zip(&ratings.surfaces) {
                    x.push(row.to_vec());
                    labels.push(label_of(sid)?);
                    groups.push(sid);
                }
            }
        }
    }
    let data = Dataset::new(
        x,
        Target::Classes { labels, n_classes: MaterialClass::ALL.len() },
        AdjectivePair::ALL.iter().map(|p| p.name().to_string()).collect(),
    )?;
    kinds
        .iter()
        .map(|&k| {
            if !k.is_classifier() {
                return Err(Error::Config(format!("{k} cannot classify materials")));
            }
            evaluate(&data, Some(&groups), k, hp, protocol, "model2")
        })
        .collect()
}

/// Model 3: classify material from extracted features, per learner and
/// feature selection.
pub fn run_model3(
    vectors: &[FeatureVector],
    protocol: &Protocol,
    kinds: &[LearnerKind],
    selections: &[GroupSelection],
    hp: &Hyperparams,
) -> Result<Vec<EvalReport>> {
    let mut out = Vec::new();
    for &sel in selections {
        let (data, groups) = features_dataset(vectors, sel)?;
        for &k in kinds {
            if !k.is_classifier() {
                return Err(Error::Config(format!("{k} cannot classify materials")));
            }
            out.push(evaluate(&data, Some(&groups), k, hp, protocol, &format!("model3/{}", sel.name()))?);
        }
    }
    Ok(out)
}

/// The same dataset with its class labels permuted by a seeded shuffle.
pub fn shuffled_labels(data: &Dataset, seed: u64) -> Dataset {
    let mut d = data.clone();
    if let Target::Classes { labels, .. } = &mut d.target {
        labels.shuffle(&mut rng_from(seed));
    }
    d
}

/// Leakage check: pure-noise features plus a canary column that equals the
/// label on test rows and is random on training rows. A pipeline that only
/// fits on training rows cannot exploit it, so accuracy stays at chance.
pub fn leakage_canary(
    labels: &[usize],
    n_classes: usize,
    n_noise: usize,
    kind: LearnerKind,
    hp: &Hyperparams,
    protocol: &Protocol,
) -> Result<EvalReport> {
    protocol.validate()?;
    let n = labels.len();
    let mut rng = child_rng(protocol.base_seed, 0xCA5A);
    let noise: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n_noise).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let mut names: Vec<String> = (0..n_noise).map(|j| format!("noise{j}")).collect();
    names.push("canary".into());
    let per_repeat = (0..protocol.repeats)
        .into_par_iter()
        .map(|rep| -> Result<RepeatMetrics> {
            let s = split(n, Some(labels), None, protocol, rep)?;
            let mut crng = child_rng(protocol.split_seed(rep), 0xCA5A);
            let mut canary: Vec<f64> = (0..n).map(|_| crng.random_range(0..n_classes) as f64).collect();
            for &i in &s.test {
                canary[i] = labels[i] as f64;
            }
            let x: Vec<Vec<f64>> = noise
                .iter()
                .zip(&canary)
                .map(|(r, c)| r.iter().copied().chain([*c]).collect())
                .collect();
            let data = Dataset::new(x, Target::Classes { labels: labels.to_vec(), n_classes }, names.clone())?;
            let tr = data.rows(&s.train);
            let te = data.rows(&s.test);
            let model = train(kind, hp, &tr, protocol.model_seed(rep))?;
            let truth: Vec<usize> = s.test.iter().map(|&i| labels[i]).collect();
            let mut values = BTreeMap::new();
            values.insert("accuracy".to_string(), accuracy(&model.predict_class(&te.x)?, &truth));
            Ok(RepeatMetrics {
                repeat: rep,
                split_seed: protocol.split_seed(rep),
                model_seed: protocol.model_seed(rep),
                values,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport::new("leakage_canary", kind.name(), protocol, hp, n_noise + 1, per_repeat))
}
