use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Channel, MaterialClass, Procedure, Recording};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: &str = "1.0";
const TIMESTAMP_COLUMN: &str = "timestamp_s";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceEntry {
    pub surface_id: u32,
    pub material_class: MaterialClass,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialEntry {
    pub trial_id: String,
    pub participant_id: String,
    pub surface_id: u32,
    pub procedure: Procedure,
    /// Shared by every channel in the trial file (one timestamp column).
    pub sample_rate_hz: f64,
    /// Path relative to the corpus root.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub schema_version: String,
    pub surfaces: Vec<SurfaceEntry>,
    pub trials: Vec<TrialEntry>,
}

impl CorpusManifest {
    pub fn surface(&self, surface_id: u32) -> Option<&SurfaceEntry> {
        self.surfaces.iter().find(|s| s.surface_id == surface_id)
    }

    pub fn material_of(&self, surface_id: u32) -> Option<MaterialClass> {
        self.surface(surface_id).map(|s| s.material_class)
    }

    pub fn participants(&self) -> BTreeSet<&str> {
        self.trials.iter().map(|t| t.participant_id.as_str()).collect()
    }

    pub fn count_by_procedure(&self) -> BTreeMap<Procedure, usize> {
        let mut out = BTreeMap::new();
        for t in &self.trials {
            *out.entry(t.procedure).or_insert(0) += 1;
        }
        out
    }

    fn validate(&self, opts: &LoadOptions) -> Result<()> {
        let schema = |message: String| Error::Schema {
            context: MANIFEST_FILE.into(),
            message,
        };
        if self.schema_version != SCHEMA_VERSION {
            return Err(schema(format!(
                "schema_version '{}' unsupported (expected '{}')",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        let mut seen = BTreeSet::new();
        for s in &self.surfaces {
            if !(1..=50).contains(&s.surface_id) {
                return Err(schema(format!("surface_id {} outside 1..50", s.surface_id)));
            }
            if !seen.insert(s.surface_id) {
                return Err(schema(format!("duplicate surface_id {}", s.surface_id)));
            }
        }
        if opts.require_full_design {
            if self.surfaces.len() != 50 {
                return Err(schema(format!(
                    "expected 50 surfaces, found {}",
                    self.surfaces.len()
                )));
            }
            for m in MaterialClass::ALL {
                let n = self.surfaces.iter().filter(|s| s.material_class == m).count();
                if n != 5 {
                    return Err(schema(format!("material {m} has {n} surfaces, expected 5")));
                }
            }
        }
        let mut ids = BTreeSet::new();
        for t in &self.trials {
            if !ids.insert(t.trial_id.as_str()) {
                return Err(schema(format!("duplicate trial_id {}", t.trial_id)));
            }
            if !seen.contains(&t.surface_id) {
                return Err(schema(format!(
                    "trial {} references unknown surface {}",
                    t.trial_id, t.surface_id
                )));
            }
            if !(t.sample_rate_hz > 0.0 && t.sample_rate_hz.is_finite()) {
                return Err(schema(format!(
                    "trial {} has non-positive sample_rate_hz",
                    t.trial_id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Enforce the 50-surface / 10-class / 5-per-class design.
    pub require_full_design: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            require_full_design: true,
        }
    }
}

/// A validated corpus. Recordings are loaded on demand.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub manifest: CorpusManifest,
}

impl Corpus {
    pub fn load_recording(&self, trial: &TrialEntry) -> Result<Recording> {
        let material = self.manifest.material_of(trial.surface_id).ok_or_else(|| {
            Error::Schema {
                context: format!("trial {}", trial.trial_id),
                message: format!("surface {} not in manifest", trial.surface_id),
            }
        })?;
        let path = self.root.join(&trial.path);
        if !path.is_file() {
            return Err(Error::MissingFile {
                trial_id: trial.trial_id.clone(),
                path,
            });
        }
        let (timestamps, channels) = read_trial_csv(&path, &trial.trial_id)?;
        let rec = Recording {
            trial_id: trial.trial_id.clone(),
            participant_id: trial.participant_id.clone(),
            surface_id: trial.surface_id,
            material_class: material,
            procedure: trial.procedure,
            sample_rate_hz: trial.sample_rate_hz,
            timestamps,
            channels,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn trials(&self) -> &[TrialEntry] {
        &self.manifest.trials
    }
}

pub fn load_corpus(root: impl AsRef<Path>) -> Result<Corpus> {
    load_corpus_with(root, &LoadOptions::default())
}

/// Read and validate the manifest, then parse every referenced trial file
/// once so that malformed files surface here rather than mid-extraction.
pub fn load_corpus_with(root: impl AsRef<Path>, opts: &LoadOptions) -> Result<Corpus> {
    let root = root.as_ref().to_path_buf();
    let manifest_path = root.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::ManifestNotFound(manifest_path));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: CorpusManifest = serde_json::from_str(&text).map_err(|e| Error::Schema {
        context: MANIFEST_FILE.into(),
        message: e.to_string(),
    })?;
    manifest.validate(opts)?;
    let corpus = Corpus { root, manifest };
    corpus
        .manifest
        .trials
        .par_iter()
        .try_for_each(|t| corpus.load_recording(t).map(drop))?;
    log::info!(
        "loaded corpus: {} surfaces, {} trials {:?}",
        corpus.manifest.surfaces.len(),
        corpus.manifest.trials.len(),
        corpus.manifest.count_by_procedure()
    );
    Ok(corpus)
}

pub fn write_manifest(root: impl AsRef<Path>, manifest: &CorpusManifest) -> Result<()> {
    let path = root.as_ref().join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Write a trial CSV: `timestamp_s` followed by the channels in canonical order.
/// Values use the shortest round-trip decimal form, so reading back is exact.
pub fn write_trial_csv(path: impl AsRef<Path>, rec: &Recording) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    let chans: Vec<(&Channel, &Vec<f64>)> = rec.channels.iter().collect();
    let mut header = vec![TIMESTAMP_COLUMN.to_string()];
    header.extend(chans.iter().map(|(c, _)| c.name().to_string()));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..rec.timestamps.len() {
        row.clear();
        row.push(rec.timestamps[i].to_string());
        for (_, v) in &chans {
            row.push(v[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Parse a trial CSV into timestamps and channels. Short rows or trailing
/// empty cells shorten the affected channel, which the caller reports as a
/// length mismatch naming that channel.
pub fn read_trial_csv(
    path: impl AsRef<Path>,
    trial_id: &str,
) -> Result<(Vec<f64>, BTreeMap<Channel, Vec<f64>>)> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_path(path)?;
    let header = r.headers()?.clone();
    let schema = |message: String| Error::Schema {
        context: format!("trial {trial_id} ({})", path.display()),
        message,
    };
    if header.get(0) != Some(TIMESTAMP_COLUMN) {
        return Err(schema(format!("first column must be '{TIMESTAMP_COLUMN}'")));
    }
    let mut cols: Vec<Channel> = Vec::new();
    for name in header.iter().skip(1) {
        let ch = Channel::from_name(name)
            .ok_or_else(|| schema(format!("unknown channel '{name}'")))?;
        if cols.contains(&ch) {
            return Err(schema(format!("duplicate channel '{name}'")));
        }
        cols.push(ch);
    }
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); cols.len() + 1];
    let mut ended = vec![false; cols.len() + 1];
    for (row_idx, rec) in r.records().enumerate() {
        let rec = rec?;
        for col in 0..=cols.len() {
            let cell = rec.get(col).map(str::trim).unwrap_or("");
            let name = if col == 0 {
                TIMESTAMP_COLUMN
            } else {
                cols[col - 1].name()
            };
            if cell.is_empty() {
                ended[col] = true;
                continue;
            }
            if ended[col] {
                return Err(Error::Channel {
                    trial_id: trial_id.to_string(),
                    channel: name.to_string(),
                    message: format!("has a gap before row {}", row_idx + 2),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Channel {
                trial_id: trial_id.to_string(),
                channel: name.to_string(),
                message: format!("unparseable value '{cell}' at row {}", row_idx + 2),
            })?;
            data[col].push(v);
        }
    }
    let mut it = data.into_iter();
    let timestamps = it.next().unwrap_or_default();
    let channels = cols.into_iter().zip(it).collect();
    Ok((timestamps, channels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dir_reports_manifest_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_corpus(dir.path()).unwrap_err();
        assert!(err.to_string().contains("manifest not found"), "{err}");
    }

    #[test]
    fn mismatched_channel_length_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = CorpusManifest {
            schema_version: SCHEMA_VERSION.into(),
            surfaces: vec![SurfaceEntry {
                surface_id: 1,
                material_class: MaterialClass::Wood,
                description: String::new(),
            }],
            trials: vec![TrialEntry {
                trial_id: "bad".into(),
                participant_id: "p1".into(),
                surface_id: 1,
                procedure: Procedure::Pressing,
                sample_rate_hz: 100.0,
                path: "bad.csv".into(),
            }],
        };
        write_manifest(dir.path(), &manifest).unwrap();
        fs::write(
            dir.path().join("bad.csv"),
            "timestamp_s,normal_force_N,indentation_mm\n0,0,0\n0.01,1,0.1\n0.02,2\n",
        )
        .unwrap();
        let opts = LoadOptions {
            require_full_design: false,
        };
        let err = load_corpus_with(dir.path(), &opts).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("indentation_mm") && msg.contains("bad"), "{msg}");
    }

    #[test]
    fn missing_trial_file_reports_trial() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = CorpusManifest {
            schema_version: SCHEMA_VERSION.into(),
            surfaces: vec![SurfaceEntry {
                surface_id: 2,
                material_class: MaterialClass::Foam,
                description: String::new(),
            }],
            trials: vec![TrialEntry {
                trial_id: "gone".into(),
                participant_id: "p1".into(),
                surface_id: 2,
                procedure: Procedure::Sliding,
                sample_rate_hz: 100.0,
                path: "gone.csv".into(),
            }],
        };
        write_manifest(dir.path(), &manifest).unwrap();
        let err = load_corpus_with(dir.path(), &LoadOptions { require_full_design: false })
            .unwrap_err();
        assert!(matches!(err, Error::MissingFile { .. }), "{err}");
    }

    #[test]
    fn full_design_is_enforced_by_default() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = CorpusManifest {
            schema_version: SCHEMA_VERSION.into(),
            surfaces: vec![],
            trials: vec![],
        };
        write_manifest(dir.path(), &manifest).unwrap();
        let err = load_corpus(dir.path()).unwrap_err();
        assert!(err.to_string().contains("50 surfaces"), "{err}");
    }

    #[test]
    fn unknown_manifest_key_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"schema_version":"1.0","surfaces":[],"trials":[],"extra":1}"#,
        )
        .unwrap();
        let err = load_corpus(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }), "{err}");
    }
}
