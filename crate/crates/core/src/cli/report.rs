use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::ReportFile;
use crate::meta::RunMeta;

/// One aggregate metric of one report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub source: String,
    pub task: String,
    pub model: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub repeats: usize,
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Collect every report in the JSON files of `dirs`. All files carrying
/// metadata must share one config hash unless `force` is set; the returned
/// hash is that shared value, or "mixed". The seed is returned when every
/// file agrees on one.
pub fn merge_reports(dirs: &[PathBuf], force: bool) -> Result<(Vec<SummaryRow>, String, Option<u64>)> {
    let mut hashes = BTreeSet::new();
    let mut seeds = BTreeSet::new();
    let mut rows = Vec::new();
    for dir in dirs {
        for path in json_files(dir)? {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            if let Some(h) = value.pointer("/meta/config_hash").and_then(|v| v.as_str()) {
                hashes.insert(h.to_string());
            }
            if let Some(seed) = value.pointer("/meta/seed").and_then(|v| v.as_u64()) {
                seeds.insert(seed);
            }
            if value.get("reports").is_none() {
                continue;
            }
            let file: ReportFile = serde_json::from_value(value)?;
            let source = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            for r in file.reports {
                for (metric, agg) in &r.aggregate {
                    rows.push(SummaryRow {
                        source: source.clone(),
                        task: r.task.clone(),
                        model: r.model.clone(),
                        metric: metric.clone(),
                        mean: agg.mean,
                        std: agg.std,
                        repeats: r.per_repeat.len(),
                    });
                }
            }
        }
    }
    if hashes.len() > 1 && !force {
        return Err(Error::Config(format!(
            "outputs come from {} different configs ({}); pass --force to merge anyway",
            hashes.len(),
            hashes.iter().map(|h| &h[..h.len().min(12)]).collect::<Vec<_>>().join(", ")
        )));
    }
    let hash = match hashes.len() {
        1 => hashes.into_iter().next().unwrap_or_default(),
        0 => "none".to_string(),
        _ => "mixed".to_string(),
    };
    let seed = if seeds.len() == 1 { seeds.into_iter().next() } else { None };
    Ok((rows, hash, seed))
}

pub(crate) fn write_summary_csv(path: impl AsRef<Path>, rows: &[SummaryRow], meta: &RunMeta) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    writeln!(buf, "{}", meta.csv_comment()).expect("write to Vec");
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
