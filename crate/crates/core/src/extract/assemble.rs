use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    extract_heatflux, extract_pressing, extract_sliding, extract_temperature, feature_names,
    ExtractConfig, Extracted, FeatureVector, N_FEATURES,
};
use crate::dataio::{AdjectivePair, Corpus, MaterialClass, Procedure, RatingMatrix, TrialEntry};
use crate::error::{Error, Result};
use crate::meta::RunMeta;

/// Run the extractor(s) for one trial's procedure.
pub fn extract_trial(corpus: &Corpus, trial: &TrialEntry, cfg: &ExtractConfig) -> Result<Extracted> {
    let r = corpus.load_recording(trial)?;
    match trial.procedure {
        Procedure::Pressing => extract_pressing(&r, cfg),
        Procedure::StaticContact => {
            let mut e = extract_heatflux(&r, cfg)?;
            e.merge(extract_temperature(&r, cfg)?);
            Ok(e)
        }
        Procedure::Sliding => extract_sliding(&r, cfg),
    }
}

/// Per-trial extraction outcome kept for the diagnostics sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFeatures {
    pub trial_id: String,
    pub procedure: Procedure,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extracted: Option<Extracted>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub vectors: Vec<FeatureVector>,
    pub trials: Vec<TrialFeatures>,
    /// Dropped samples and failed trials, in deterministic order.
    pub warnings: Vec<String>,
}

/// Extract every trial (in parallel) and join them into one 98-feature vector
/// per (participant, surface, trial tuple). The k-th trial of each procedure,
/// in trial-id order, forms the k-th tuple. Samples missing a procedure or
/// with a failed extraction are dropped with a warning.
pub fn assemble_features(corpus: &Corpus, cfg: &ExtractConfig) -> Result<Assembly> {
    cfg.validate()?;
    let trials = corpus.trials();
    let results: Vec<Result<Extracted>> = trials
        .par_iter()
        .map(|t| extract_trial(corpus, t, cfg))
        .collect();

    let mut by_id = BTreeMap::new();
    let mut trial_out = Vec::with_capacity(trials.len());
    let mut warnings = Vec::new();
    for (t, res) in trials.iter().zip(results) {
        match res {
            Ok(e) => {
                by_id.insert(t.trial_id.as_str(), e.clone());
                trial_out.push(TrialFeatures {
                    trial_id: t.trial_id.clone(),
                    procedure: t.procedure,
                    error: None,
                    extracted: Some(e),
                });
            }
            Err(err) => {
                warnings.push(format!("trial {}: extraction failed: {err}", t.trial_id));
                trial_out.push(TrialFeatures {
                    trial_id: t.trial_id.clone(),
                    procedure: t.procedure,
                    error: Some(err.to_string()),
                    extracted: None,
                });
            }
        }
    }
    trial_out.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));

    let mut groups: BTreeMap<(&str, u32), [Vec<&str>; 3]> = BTreeMap::new();
    for t in trials {
        groups.entry((t.participant_id.as_str(), t.surface_id)).or_default()[t.procedure.index()]
            .push(t.trial_id.as_str());
    }
    let mut vectors = Vec::new();
    for ((pid, sid), mut lists) in groups {
        for l in &mut lists {
            l.sort_unstable();
        }
        let material = corpus
            .manifest
            .material_of(sid)
            .ok_or_else(|| Error::invalid(format!("surface {sid} missing from manifest")))?;
        let tuples = lists.iter().map(Vec::len).max().unwrap_or(0);
        'tuple: for k in 0..tuples {
            let mut ids: Vec<String> = Vec::with_capacity(3);
            let mut merged = Extracted::default();
            for p in Procedure::ALL {
                let Some(&id) = lists[p.index()].get(k) else {
                    let msg = format!("sample {pid}/s{sid}/t{k} dropped: no {p} trial");
                    log::warn!("{msg}");
                    warnings.push(msg);
                    continue 'tuple;
                };
                let Some(e) = by_id.get(id) else {
                    let msg = format!("sample {pid}/s{sid}/t{k} dropped: {p} trial {id} failed");
                    log::warn!("{msg}");
                    warnings.push(msg);
                    continue 'tuple;
                };
                ids.push(id.to_string());
                merged.merge(e.clone());
            }
            let values = order_values(&merged)?;
            vectors.push(FeatureVector {
                participant_id: pid.to_string(),
                surface_id: sid,
                trial_index: k,
                trial_ids: [ids[0].clone(), ids[1].clone(), ids[2].clone()],
                material,
                values,
                flags: merged.flags,
            });
        }
    }
    Ok(Assembly { vectors, trials: trial_out, warnings })
}

/// Reorder extractor output into registry order, checking completeness.
fn order_values(e: &Extracted) -> Result<Vec<f64>> {
    let names = feature_names();
    if e.values.len() != N_FEATURES {
        return Err(Error::invalid(format!("expected {N_FEATURES} features, got {}", e.values.len())));
    }
    names
        .iter()
        .map(|n| {
            let v = e.get(n).ok_or_else(|| Error::invalid(format!("feature {n} missing")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::invalid(format!("feature {n} is not finite")))
            }
        })
        .collect()
}

const KEY_COLUMNS: [&str; 7] = [
    "participant_id",
    "surface_id",
    "trial_index",
    "trial_pressing",
    "trial_static_contact",
    "trial_sliding",
    "material",
];

fn rating_column(p: AdjectivePair) -> String {
    format!("rating_{}", p.name())
}

/// Feature table as read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub meta: Option<RunMeta>,
    pub vectors: Vec<FeatureVector>,
    /// Averaged rating per row, when the CSV carries rating columns.
    pub ratings: Option<Vec<[f64; 5]>>,
}

/// Write the features CSV: key columns, material label, the 98 features, and
/// the surface's averaged ratings when `ratings` is given.
pub fn write_features_csv(
    path: impl AsRef<Path>,
    vectors: &[FeatureVector],
    ratings: Option<&RatingMatrix>,
    meta: Option<&RunMeta>,
) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    if let Some(m) = meta {
        writeln!(buf, "{}", m.csv_comment()).expect("write to Vec");
    }
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        let mut header: Vec<String> = KEY_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend(feature_names().iter().cloned());
        if ratings.is_some() {
            header.extend(AdjectivePair::ALL.map(rating_column));
        }
        w.write_record(&header)?;
        for v in vectors {
            let mut row = vec![
                v.participant_id.clone(),
                v.surface_id.to_string(),
                v.trial_index.to_string(),
                v.trial_ids[0].clone(),
                v.trial_ids[1].clone(),
                v.trial_ids[2].clone(),
                v.material.to_string(),
            ];
            row.extend(v.values.iter().map(f64::to_string));
            if let Some(r) = ratings {
                let avg = r.averaged_for(v.surface_id).ok_or_else(|| {
                    Error::Ratings(format!("surface {} has no averaged rating", v.surface_id))
                })?;
                row.extend(avg.iter().map(f64::to_string));
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_features_csv(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let meta = if first.starts_with('#') {
        Some(RunMeta::from_csv_comment(first.trim_end())?)
    } else {
        None
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let schema = |message: String| Error::Schema { context: path.display().to_string(), message };
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let names = feature_names();
    let expected_features: Vec<&str> = names.iter().map(String::as_str).collect();
    if header.len() < KEY_COLUMNS.len() + N_FEATURES
        || header[..KEY_COLUMNS.len()] != KEY_COLUMNS
        || header[KEY_COLUMNS.len()..KEY_COLUMNS.len() + N_FEATURES] != expected_features[..]
    {
        return Err(schema("unexpected feature CSV header".into()));
    }
    let rest = &header[KEY_COLUMNS.len() + N_FEATURES..];
    let rating_cols: Vec<String> = AdjectivePair::ALL.map(rating_column).to_vec();
    let has_ratings = match rest.len() {
        0 => false,
        5 if rest == rating_cols.as_slice() => true,
        _ => return Err(schema("unexpected trailing columns".into())),
    };
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| schema(format!("bad {what} value '{s}'")))
    };
    let mut vectors = Vec::new();
    let mut ratings = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let values = (0..N_FEATURES)
            .map(|i| num(f(KEY_COLUMNS.len() + i), &names[i]))
            .collect::<Result<Vec<f64>>>()?;
        vectors.push(FeatureVector {
            participant_id: f(0).to_string(),
            surface_id: f(1).parse().map_err(|_| schema(format!("bad surface_id '{}'", f(1))))?,
            trial_index: f(2).parse().map_err(|_| schema(format!("bad trial_index '{}'", f(2))))?,
            trial_ids: [f(3).to_string(), f(4).to_string(), f(5).to_string()],
            material: f(6).parse::<MaterialClass>()?,
            values,
            flags: BTreeMap::new(),
        });
        if has_ratings {
            let base = KEY_COLUMNS.len() + N_FEATURES;
            let mut row = [0.0; 5];
            for (k, v) in row.iter_mut().enumerate() {
                *v = num(f(base + k), "rating")?;
            }
            ratings.push(row);
        }
    }
    Ok(FeatureTable { meta, vectors, ratings: has_ratings.then_some(ratings) })
}

/// Quality flags and fit diagnostics written next to the features CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<RunMeta>,
    pub config: ExtractConfig,
    pub sample_flags: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    pub trials: Vec<TrialFeatures>,
    pub warnings: Vec<String>,
}

pub fn write_sidecar(
    path: impl AsRef<Path>,
    assembly: &Assembly,
    cfg: &ExtractConfig,
    meta: Option<&RunMeta>,
) -> Result<()> {
    let path = path.as_ref();
    let sidecar = Sidecar {
        meta: meta.cloned(),
        config: cfg.clone(),
        sample_flags: assembly
            .vectors
            .iter()
            .filter(|v| !v.flags.is_empty())
            .map(|v| (v.key(), v.flags.clone()))
            .collect(),
        trials: assembly.trials.clone(),
        warnings: assembly.warnings.clone(),
    };
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
