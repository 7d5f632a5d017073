use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Protocol;
use crate::error::{Error, Result};
use crate::meta::RunMeta;
use crate::models::Hyperparams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over repeats.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatMetrics {
    pub repeat: usize,
    pub split_seed: u64,
    pub model_seed: u64,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub model: String,
    pub n_features: usize,
    pub protocol: Protocol,
    pub hyperparams: Hyperparams,
    pub aggregate: BTreeMap<String, MeanStd>,
    pub seeds: Vec<u64>,
    pub per_repeat: Vec<RepeatMetrics>,
}

impl EvalReport {
    pub fn new(
        task: &str,
        model: &str,
        protocol: &Protocol,
        hp: &Hyperparams,
        n_features: usize,
        per_repeat: Vec<RepeatMetrics>,
    ) -> Self {
        let mut aggregate = BTreeMap::new();
        if let Some(first) = per_repeat.first() {
            for key in first.values.keys() {
                let v: Vec<f64> = per_repeat.iter().map(|r| r.values[key]).collect();
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
                aggregate.insert(key.clone(), MeanStd { mean, std });
            }
        }
        Self {
            task: task.to_string(),
            model: model.to_string(),
            n_features,
            protocol: protocol.clone(),
            hyperparams: hp.clone(),
            aggregate,
            seeds: per_repeat.iter().map(|r| r.split_seed).collect(),
            per_repeat,
        }
    }

    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.aggregate.get(metric).map(|m| m.mean)
    }
}

/// JSON document wrapping a set of reports with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub meta: Option<RunMeta>,
    /// Snapshot of the run configuration that produced the reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub command: String,
    pub reports: Vec<EvalReport>,
}

pub fn write_reports_json(path: impl AsRef<Path>, file: &ReportFile) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(file)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Flat CSV: one row per report × repeat × metric.
pub fn write_reports_csv(path: impl AsRef<Path>, reports: &[EvalReport], meta: Option<&RunMeta>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    if let Some(m) = meta {
        writeln!(buf, "{}", m.csv_comment()).expect("write to Vec");
    }
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        w.write_record(["task", "model", "repeat", "split_seed", "model_seed", "metric", "value"])?;
        for r in reports {
            for rep in &r.per_repeat {
                for (metric, value) in &rep.values {
                    w.write_record([
                        r.task.as_str(),
                        r.model.as_str(),
                        &rep.repeat.to_string(),
                        &rep.split_seed.to_string(),
                        &rep.model_seed.to_string(),
                        metric,
                        &value.to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
