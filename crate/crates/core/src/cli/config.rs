use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{ExtractConfig, N_FEATURES};
use crate::harness::{GroupSelection, Model2Samples, Protocol};
use crate::meta::{hash_json, RunMeta};
use crate::models::{Hyperparams, LearnerKind};
use crate::synth::CorpusOptions;

/// Input locations. Excluded from the config hash and from written
/// metadata so outputs do not depend on where a run happened.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub surfaces: usize,
    pub options: CorpusOptions,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { surfaces: 50, options: CorpusOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskConfig {
    pub model1_group: GroupSelection,
    pub model2_samples: Model2Samples,
    pub model2_kinds: Vec<LearnerKind>,
    pub model3_kinds: Vec<LearnerKind>,
    /// Feature groups for model3 and ablation.
    pub groups: Vec<GroupSelection>,
    pub ablation_kind: LearnerKind,
    pub topk_kind: LearnerKind,
    pub topk_ks: Vec<usize>,
    pub pca_standardize: bool,
    pub pca_components: usize,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            model1_group: GroupSelection::All,
            model2_samples: Model2Samples::Surfaces,
            model2_kinds: vec![
                LearnerKind::Logistic,
                LearnerKind::GaussianNb,
                LearnerKind::Knn,
                LearnerKind::RfClassifier,
            ],
            model3_kinds: vec![LearnerKind::RfClassifier],
            groups: GroupSelection::ALL.to_vec(),
            ablation_kind: LearnerKind::RfClassifier,
            topk_kind: LearnerKind::RfClassifier,
            topk_ks: vec![1, 2, 3, 5, 10, 15, 20, 25, 30, 40, 50, 60, 70, 80, 90, 98],
            pca_standardize: true,
            pca_components: 5,
        }
    }
}

/// Everything a run depends on. Loaded from one JSON document; command-line
/// flags override the file, which overrides the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub paths: Paths,
    /// The single seed of a run; `protocol.base_seed` is overwritten with it.
    pub seed: u64,
    pub protocol: Protocol,
    pub extract: ExtractConfig,
    pub hyperparams: Hyperparams,
    pub synth: SynthConfig,
    pub tasks: TaskConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        self.extract.validate()?;
        self.hyperparams.validate()?;
        let t = &self.tasks;
        for k in t.model2_kinds.iter().chain(&t.model3_kinds).chain([&t.ablation_kind, &t.topk_kind]) {
            if !k.is_classifier() {
                return Err(Error::Config(format!("{k} is not a classifier")));
            }
        }
        if t.groups.is_empty() || t.model2_kinds.is_empty() || t.model3_kinds.is_empty() {
            return Err(Error::Config("task lists must not be empty".into()));
        }
        if t.topk_ks.is_empty() || t.topk_ks.iter().any(|&k| k == 0 || k > N_FEATURES) {
            return Err(Error::Config(format!("topk_ks must be non-empty and within 1..={N_FEATURES}")));
        }
        if t.topk_kind != LearnerKind::RfClassifier {
            return Err(Error::Config(format!("{} has no feature importance", t.topk_kind)));
        }
        if t.pca_components == 0 {
            return Err(Error::Config("pca_components must be positive".into()));
        }
        Ok(())
    }

    /// The config with paths removed: what gets hashed and recorded.
    pub fn recorded(&self) -> Self {
        Self { paths: Paths::default(), ..self.clone() }
    }

    pub fn meta(&self) -> Result<RunMeta> {
        Ok(RunMeta::new(hash_json(&self.recorded())?, self.seed))
    }
}
