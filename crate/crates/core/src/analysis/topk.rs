use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::FeatureVector;
use crate::harness::{evaluate, features_dataset, EvalReport, GroupSelection, MeanStd, Protocol};
use crate::models::{train, Dataset, Hyperparams, ImportanceRanking, LearnerKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopkPoint {
    pub k: usize,
    pub accuracy: MeanStd,
    pub features: Vec<String>,
}

/// Importance ranking from one model trained on all of `data` with `seed`.
pub fn importance_for(data: &Dataset, kind: LearnerKind, hp: &Hyperparams, seed: u64) -> Result<ImportanceRanking> {
    train(kind, hp, data, seed)?.feature_importance()
}

/// Accuracy under the protocol using only the `k` top-ranked features, for
/// each `k`. Selected columns keep their order in `data`, so `k = p`
/// reproduces the full-feature evaluation exactly.
pub fn topk_curve(
    data: &Dataset,
    groups: Option<&[u32]>,
    ranking: &ImportanceRanking,
    ks: &[usize],
    kind: LearnerKind,
    hp: &Hyperparams,
    protocol: &Protocol,
) -> Result<Vec<TopkPoint>> {
    if ks.is_empty() {
        return Err(Error::invalid("top-k curve needs at least one k"));
    }
    let p = data.p();
    if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > p) {
        return Err(Error::invalid(format!("k={bad} outside 1..={p}")));
    }
    if ranking.entries.len() < ks.iter().copied().max().unwrap_or(0) {
        return Err(Error::invalid("importance ranking is shorter than the largest k"));
    }
    ks.iter()
        .map(|&k| {
            let top = ranking.top(k);
            let idx: Vec<usize> = (0..p).filter(|&j| top.contains(&data.feature_names[j].as_str())).collect();
            if idx.len() != k {
                return Err(Error::invalid("importance ranking names features missing from the dataset"));
            }
            let sub = data.column_indices(&idx);
            let report = evaluate(&sub, groups, kind, hp, protocol, &format!("topk/{k}"))?;
            let accuracy = report
                .aggregate
                .get("accuracy")
                .copied()
                .ok_or_else(|| Error::invalid("top-k curve needs a classification task"))?;
            Ok(TopkPoint { k, accuracy, features: sub.feature_names })
        })
        .collect()
}

/// One evaluation per named feature group ("pressing", "thermal",
/// "sliding", "all").
pub fn ablation(
    vectors: &[FeatureVector],
    groups: &[&str],
    kind: LearnerKind,
    hp: &Hyperparams,
    protocol: &Protocol,
) -> Result<Vec<EvalReport>> {
    let selections = groups.iter().map(|g| g.parse::<GroupSelection>()).collect::<Result<Vec<_>>>()?;
    selections
        .into_iter()
        .map(|sel| {
            let (data, surfaces) = features_dataset(vectors, sel)?;
            evaluate(&data, Some(&surfaces), kind, hp, protocol, &format!("ablation/{}", sel.name()))
        })
        .collect()
}
