//! Analyses used to interpret the ratings and the models: PCA, classical
//! MDS, Spearman matrices, the uniform null model, top-k feature curves and
//! feature-group ablation.

mod linalg;
mod mds;
mod pca;
mod spearman;
mod topk;

use std::io::Write;
use std::path::Path;

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meta::RunMeta;
use crate::rng::rng_from;

pub use mds::{classical_mds, euclidean_distances, participant_distance, DistanceMatrix, MdsResult};
pub use pca::{pca, PcaResult};
pub use spearman::{mid_ranks, pearson, spearman, spearman_matrix, SpearmanResult};
pub use topk::{ablation, importance_for, topk_curve, TopkPoint};

/// `n` seeded i.i.d. draws from uniform(0, 1).
pub fn null_model(n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("null model needs n >= 1"));
    }
    let mut rng = rng_from(seed);
    Ok((0..n).map(|_| rng.random::<f64>()).collect())
}

/// Labeled matrix as CSV: a `label` column followed by one column per
/// entry of `cols`, preceded by the metadata comment when given.
pub fn write_matrix_csv(
    path: impl AsRef<Path>,
    rows: &[String],
    cols: &[String],
    values: &[Vec<f64>],
    meta: Option<&RunMeta>,
) -> Result<()> {
    let path = path.as_ref();
    if rows.len() != values.len() || values.iter().any(|r| r.len() != cols.len()) {
        return Err(Error::invalid("matrix labels do not match its shape"));
    }
    let mut buf = Vec::new();
    if let Some(m) = meta {
        writeln!(buf, "{}", m.csv_comment()).expect("write to Vec");
    }
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        w.write_record(std::iter::once("label").chain(cols.iter().map(String::as_str)))?;
        for (label, row) in rows.iter().zip(values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// JSON metadata block written next to each analysis CSV.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisMeta<T: Serialize> {
    pub meta: Option<RunMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub analysis: String,
    pub flags: Vec<String>,
    pub details: T,
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_model_constant_target() {
        let u = null_model(100_000, 3).unwrap();
        let mse = u.iter().map(|v| (0.5 - v).powi(2)).sum::<f64>() / u.len() as f64;
        assert!((mse - 1.0 / 12.0).abs() < 0.005, "{mse}");
    }

    #[test]
    fn null_model_uniform_target() {
        let u = null_model(100_000, 4).unwrap();
        let t = null_model(100_000, 5).unwrap();
        let mse = u.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / u.len() as f64;
        assert!((mse - 1.0 / 6.0).abs() < 0.005, "{mse}");
    }

    #[test]
    fn null_model_is_seeded() {
        assert_eq!(null_model(50, 9).unwrap(), null_model(50, 9).unwrap());
        assert_ne!(null_model(50, 9).unwrap(), null_model(50, 10).unwrap());
        assert!(null_model(1000, 1).unwrap().iter().all(|v| (0.0..1.0).contains(v)));
        assert!(null_model(0, 1).is_err());
    }

    #[test]
    fn matrix_csv_shape() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let meta = RunMeta::new("abc", 1);
        write_matrix_csv(&p, &["a".into()], &["x".into(), "y".into()], &[vec![1.0, 2.0]], Some(&meta)).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().collect::<Vec<_>>(), ["# config_hash=abc seed=1 version=0.1.0", "label,x,y", "a,1,2"]);
        assert!(write_matrix_csv(&p, &[], &["x".into()], &[vec![1.0]], None).is_err());
    }
}
