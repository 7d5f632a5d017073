use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::report::{merge_reports, write_summary_csv};
use crate::analysis::{
    ablation, classical_mds, importance_for, participant_distance, pca as run_pca, spearman_matrix, topk_curve,
    write_json, write_matrix_csv, AnalysisMeta,
};
use crate::dataio::{load_corpus, normalize_ratings, read_ratings, AdjectivePair, MaterialClass, RatingMatrix};
use crate::error::{Error, Result};
use crate::extract::{assemble_features, read_features_csv, write_features_csv, write_sidecar, FeatureTable};
use crate::harness::{
    features_dataset, run_model1, run_model2, run_model3, write_reports_csv, write_reports_json, EvalReport,
    GroupSelection, ReportFile,
};
use crate::meta::RunMeta;
use crate::synth::{class_templates, gen_corpus, RATINGS_FILE};

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let out = required(&cfg.paths.out, "out")?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    Ok(out)
}

fn config_value(cfg: &RunConfig) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(cfg.recorded())?)
}

/// Ratings from `--ratings`, else `<corpus>/ratings.json` when present.
fn load_ratings(cfg: &RunConfig) -> Result<Option<RatingMatrix>> {
    let path = match (&cfg.paths.ratings, &cfg.paths.corpus) {
        (Some(p), _) => p.clone(),
        (None, Some(c)) if c.join(RATINGS_FILE).is_file() => c.join(RATINGS_FILE),
        _ => return Ok(None),
    };
    info!("reading ratings from {}", path.display());
    Ok(Some(normalize_ratings(&read_ratings(&path)?)?))
}

fn load_features(cfg: &RunConfig) -> Result<FeatureTable> {
    let path = required(&cfg.paths.features, "features")?;
    let table = read_features_csv(path)?;
    info!("read {} feature vectors from {}", table.vectors.len(), path.display());
    Ok(table)
}

fn write_reports(cfg: &RunConfig, name: &str, reports: Vec<EvalReport>) -> Result<()> {
    let out = out_dir(cfg)?;
    let meta = cfg.meta()?;
    write_reports_csv(out.join(format!("{name}.csv")), &reports, Some(&meta))?;
    let file = ReportFile { meta: Some(meta), config: Some(config_value(cfg)?), command: name.into(), reports };
    write_reports_json(out.join(format!("{name}.json")), &file)?;
    for r in &file.reports {
        let summary: Vec<String> = r.aggregate.iter().map(|(k, v)| format!("{k}={:.4}±{:.4}", v.mean, v.std)).collect();
        println!("{} {} {}", r.task, r.model, summary.join(" "));
    }
    Ok(())
}

fn write_meta<T: Serialize>(cfg: &RunConfig, path: PathBuf, analysis: &str, flags: Vec<String>, details: T) -> Result<()> {
    let doc = AnalysisMeta {
        meta: Some(cfg.meta()?),
        config: Some(config_value(cfg)?),
        analysis: analysis.into(),
        flags,
        details,
    };
    write_json(path, &doc)
}

pub fn validate(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(required(&cfg.paths.corpus, "corpus")?)?;
    corpus
        .trials()
        .par_iter()
        .map(|t| corpus.load_recording(t).map(|_| ()))
        .collect::<Result<Vec<()>>>()?;
    let ratings = load_ratings(cfg)?;
    let counts: BTreeMap<String, usize> =
        corpus.manifest.count_by_procedure().into_iter().map(|(p, n)| (p.name().to_string(), n)).collect();
    println!(
        "ok: {} surfaces, {} participants, {} trials {:?}",
        corpus.manifest.surfaces.len(),
        corpus.manifest.participants().len(),
        corpus.trials().len(),
        counts
    );
    if let Some(r) = &ratings {
        println!("ratings: {} participants over {} surfaces", r.per_participant.len(), r.surfaces.len());
        for (p, pair) in &r.constant_columns {
            warn!("participant {p} rated {pair} constant; normalized to 0.5");
        }
    }
    if cfg.paths.out.is_some() {
        #[derive(Serialize)]
        struct Summary {
            surfaces: usize,
            participants: usize,
            trials: BTreeMap<String, usize>,
            rating_participants: usize,
        }
        let summary = Summary {
            surfaces: corpus.manifest.surfaces.len(),
            participants: corpus.manifest.participants().len(),
            trials: counts,
            rating_participants: ratings.as_ref().map_or(0, |r| r.per_participant.len()),
        };
        write_meta(cfg, out_dir(cfg)?.join("validate.json"), "validate", Vec::new(), summary)?;
    }
    Ok(())
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let out = out_dir(cfg)?;
    let g = gen_corpus(out, &class_templates(), cfg.synth.surfaces, &cfg.synth.options, cfg.seed)?;
    info!("wrote {} trials to {}", g.manifest.trials.len(), out.display());
    write_meta(cfg, out.join("synth.json"), "synth", Vec::new(), &cfg.synth)?;
    println!("synthesized {} surfaces, {} trials", g.surfaces.len(), g.manifest.trials.len());
    Ok(())
}

pub fn extract(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(required(&cfg.paths.corpus, "corpus")?)?;
    let ratings = load_ratings(cfg)?;
    let assembly = assemble_features(&corpus, &cfg.extract)?;
    for w in &assembly.warnings {
        warn!("{w}");
    }
    let out = out_dir(cfg)?;
    let meta = cfg.meta()?;
    write_features_csv(out.join("features.csv"), &assembly.vectors, ratings.as_ref(), Some(&meta))?;
    write_sidecar(out.join("features.json"), &assembly, &cfg.extract, Some(&meta))?;
    println!("extracted {} feature vectors ({} dropped)", assembly.vectors.len(), assembly.warnings.len());
    Ok(())
}

/// Averaged ratings per surface, from the ratings file or else from the
/// rating columns of the feature table.
fn ratings_for_features(cfg: &RunConfig, table: &FeatureTable) -> Result<RatingMatrix> {
    if let Some(r) = load_ratings(cfg)? {
        return Ok(r);
    }
    let rows = table
        .ratings
        .as_ref()
        .ok_or_else(|| Error::Ratings("no ratings: pass --ratings or extract with ratings".into()))?;
    let mut by_surface = BTreeMap::new();
    for (v, r) in table.vectors.iter().zip(rows) {
        by_surface.entry(v.surface_id).or_insert(*r);
    }
    Ok(RatingMatrix {
        surfaces: by_surface.keys().copied().collect(),
        averaged: by_surface.into_values().collect(),
        per_participant: BTreeMap::new(),
        constant_columns: Vec::new(),
    })
}

pub fn model1(cfg: &RunConfig) -> Result<()> {
    let table = load_features(cfg)?;
    let ratings = ratings_for_features(cfg, &table)?;
    let reports = run_model1(&table.vectors, &ratings, &cfg.protocol, cfg.tasks.model1_group, &cfg.hyperparams)?;
    write_reports(cfg, "model1", reports)
}

fn materials(cfg: &RunConfig) -> Result<BTreeMap<u32, MaterialClass>> {
    if let Some(c) = &cfg.paths.corpus {
        let corpus = load_corpus(c)?;
        return Ok(corpus.manifest.surfaces.iter().map(|s| (s.surface_id, s.material_class)).collect());
    }
    if cfg.paths.features.is_some() {
        return Ok(load_features(cfg)?.vectors.iter().map(|v| (v.surface_id, v.material)).collect());
    }
    Err(Error::Config("material labels need --corpus or --features".into()))
}

pub fn model2(cfg: &RunConfig) -> Result<()> {
    let ratings = load_ratings(cfg)?.ok_or_else(|| Error::Config("--ratings is required".into()))?;
    let reports = run_model2(
        &ratings,
        &materials(cfg)?,
        cfg.tasks.model2_samples,
        &cfg.protocol,
        &cfg.tasks.model2_kinds,
        &cfg.hyperparams,
    )?;
    write_reports(cfg, "model2", reports)
}

pub fn model3(cfg: &RunConfig) -> Result<()> {
    let table = load_features(cfg)?;
    let reports = run_model3(&table.vectors, &cfg.protocol, &cfg.tasks.model3_kinds, &cfg.tasks.groups, &cfg.hyperparams)?;
    write_reports(cfg, "model3", reports)
}

pub fn ablate(cfg: &RunConfig) -> Result<()> {
    let table = load_features(cfg)?;
    let names: Vec<&str> = cfg.tasks.groups.iter().map(|g| g.name()).collect();
    let reports = ablation(&table.vectors, &names, cfg.tasks.ablation_kind, &cfg.hyperparams, &cfg.protocol)?;
    write_reports(cfg, "ablation", reports)
}

pub fn topk(cfg: &RunConfig) -> Result<()> {
    let table = load_features(cfg)?;
    let (data, surfaces) = features_dataset(&table.vectors, GroupSelection::All)?;
    let kind = cfg.tasks.topk_kind;
    let ranking = importance_for(&data, kind, &cfg.hyperparams, cfg.seed)?;
    let curve = topk_curve(&data, Some(&surfaces), &ranking, &cfg.tasks.topk_ks, kind, &cfg.hyperparams, &cfg.protocol)?;
    let out = out_dir(cfg)?;
    let meta = cfg.meta()?;
    write_matrix_csv(
        out.join("topk.csv"),
        &curve.iter().map(|p| p.k.to_string()).collect::<Vec<_>>(),
        &["accuracy_mean".into(), "accuracy_std".into()],
        &curve.iter().map(|p| vec![p.accuracy.mean, p.accuracy.std]).collect::<Vec<_>>(),
        Some(&meta),
    )?;
    write_matrix_csv(
        out.join("importance.csv"),
        &ranking.entries.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        &["importance".into()],
        &ranking.entries.iter().map(|(_, v)| vec![*v]).collect::<Vec<_>>(),
        Some(&meta),
    )?;
    #[derive(Serialize)]
    struct Details<'a> {
        model: &'a str,
        curve: &'a [crate::analysis::TopkPoint],
    }
    write_meta(cfg, out.join("topk.json"), "topk", Vec::new(), Details { model: kind.name(), curve: &curve })?;
    for p in &curve {
        println!("k={} accuracy={:.4}±{:.4}", p.k, p.accuracy.mean, p.accuracy.std);
    }
    Ok(())
}

fn pc_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("PC{i}")).collect()
}

fn write_pca(
    cfg: &RunConfig,
    name: &str,
    x: &[Vec<f64>],
    columns: Vec<String>,
    row_labels: Vec<String>,
) -> Result<()> {
    let k = cfg.tasks.pca_components.min(x.len()).min(columns.len());
    let r = run_pca(x, k, cfg.tasks.pca_standardize)?;
    let out = out_dir(cfg)?;
    let meta = cfg.meta()?;
    let mut cols = vec!["explained_variance_ratio".to_string()];
    cols.extend(columns);
    let rows: Vec<Vec<f64>> = r
        .components
        .iter()
        .zip(&r.explained_variance_ratio)
        .map(|(c, v)| std::iter::once(*v).chain(c.iter().copied()).collect())
        .collect();
    write_matrix_csv(out.join(format!("{name}.csv")), &pc_names(k), &cols, &rows, Some(&meta))?;
    write_matrix_csv(out.join(format!("{name}_scores.csv")), &row_labels, &pc_names(k), &r.scores, Some(&meta))?;
    write_meta(cfg, out.join(format!("{name}.json")), "pca", Vec::new(), &r.explained_variance_ratio)?;
    let two: f64 = r.explained_variance_ratio.iter().take(2).sum();
    println!("{name}: PC1+PC2 explain {:.1}% of variance", 100.0 * two);
    Ok(())
}

pub fn pca(cfg: &RunConfig) -> Result<()> {
    let mut done = false;
    if let Some(r) = load_ratings(cfg)? {
        let x: Vec<Vec<f64>> = r.averaged.iter().map(|row| row.to_vec()).collect();
        let cols = AdjectivePair::ALL.iter().map(|p| p.name().to_string()).collect();
        let labels = r.surfaces.iter().map(|s| format!("s{s}")).collect();
        write_pca(cfg, "pca_ratings", &x, cols, labels)?;
        done = true;
    }
    if cfg.paths.features.is_some() {
        let table = load_features(cfg)?;
        let (data, _) = features_dataset(&table.vectors, GroupSelection::All)?;
        let labels = table.vectors.iter().map(|v| v.key()).collect();
        write_pca(cfg, "pca_features", &data.x, data.feature_names.clone(), labels)?;
        done = true;
    }
    if !done {
        return Err(Error::Config("pca needs --ratings, --corpus with ratings, or --features".into()));
    }
    Ok(())
}

pub fn mds(cfg: &RunConfig) -> Result<()> {
    let ratings = load_ratings(cfg)?.ok_or_else(|| Error::Config("--ratings is required".into()))?;
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    let mut spectra = BTreeMap::new();
    for pair in AdjectivePair::ALL {
        let d = participant_distance(&ratings, pair)?;
        let k = 2.min(d.ids.len());
        let r = classical_mds(&d.dist, k)?;
        for (id, c) in d.ids.iter().zip(&r.coords) {
            labels.push(format!("{}/{id}", pair.name()));
            let mut c = c.clone();
            c.resize(2, 0.0);
            rows.push(c);
        }
        spectra.insert(pair.name(), r.eigenvalues);
    }
    let out = out_dir(cfg)?;
    write_matrix_csv(out.join("mds.csv"), &labels, &["x".into(), "y".into()], &rows, Some(&cfg.meta()?))?;
    write_meta(cfg, out.join("mds.json"), "mds", Vec::new(), &spectra)?;
    println!("mds: embedded {} participants for {} pairs", ratings.per_participant.len(), AdjectivePair::ALL.len());
    Ok(())
}

pub fn spearman(cfg: &RunConfig) -> Result<()> {
    let ratings = load_ratings(cfg)?.ok_or_else(|| Error::Config("--ratings is required".into()))?;
    let x: Vec<Vec<f64>> = ratings.averaged.iter().map(|r| r.to_vec()).collect();
    let r = spearman_matrix(&x)?;
    let names: Vec<String> = AdjectivePair::ALL.iter().map(|p| p.name().to_string()).collect();
    let flags = r
        .constant_columns
        .iter()
        .map(|&j| format!("{}_constant_rho_undefined", names[j]))
        .collect();
    let out = out_dir(cfg)?;
    write_matrix_csv(out.join("spearman.csv"), &names, &names, &r.matrix, Some(&cfg.meta()?))?;
    write_meta(cfg, out.join("spearman.json"), "spearman", flags, &r)?;
    for (n, row) in names.iter().zip(&r.matrix) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:+.3}")).collect();
        println!("{n:>16} {}", cells.join(" "));
    }
    Ok(())
}

pub fn report(cfg: &RunConfig, inputs: &[PathBuf], force: bool) -> Result<()> {
    let out = out_dir(cfg)?.to_path_buf();
    let dirs = if inputs.is_empty() { vec![out.clone()] } else { inputs.to_vec() };
    let (rows, hash, seed) = merge_reports(&dirs, force)?;
    let meta = RunMeta::new(hash, seed.unwrap_or(cfg.seed));
    write_summary_csv(out.join("summary.csv"), &rows, &meta)?;
    println!("summary: {} rows from {} director{}", rows.len(), dirs.len(), if dirs.len() == 1 { "y" } else { "ies" });
    Ok(())
}
