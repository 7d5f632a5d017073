use tactile_core::dataio::{load_corpus, load_corpus_with, write_manifest, LoadOptions};
use tactile_core::extract::{
    assemble_features, feature_names, group_indices, read_features_csv, write_features_csv,
    write_sidecar, ExtractConfig, FeatureGroup,
};
use tactile_core::synth::{class_templates, gen_corpus, CorpusOptions};

#[test]
fn synthetic_corpus_yields_98_finite_features() {
    let dir = tempfile::tempdir().unwrap();
    let opts = CorpusOptions { participants: 2, rating_participants: 0, ..Default::default() };
    gen_corpus(dir.path(), &class_templates(), 50, &opts, 21).unwrap();
    let corpus = load_corpus(dir.path()).unwrap();
    let t = std::time::Instant::now();
    let a = assemble_features(&corpus, &ExtractConfig::default()).unwrap();
    eprintln!("assembled {} vectors in {:?}", a.vectors.len(), t.elapsed());
    assert!(a.warnings.is_empty(), "{:?}", a.warnings);
    assert_eq!(a.vectors.len(), 100);
    for v in &a.vectors {
        assert_eq!(v.values.len(), 98);
        assert!(v.values.iter().all(|x| x.is_finite()), "{}", v.key());
    }
    let sizes: Vec<usize> = FeatureGroup::ALL.iter().map(|&g| group_indices(g).len()).collect();
    assert_eq!(sizes, [6, 15, 77]);

    let csv = dir.path().join("features.csv");
    write_features_csv(&csv, &a.vectors, None, None).unwrap();
    let table = read_features_csv(&csv).unwrap();
    assert_eq!(table.vectors.len(), 100);
    for (x, y) in table.vectors.iter().zip(&a.vectors) {
        assert_eq!(x.values, y.values);
        assert_eq!(x.material, y.material);
    }
    let header = std::fs::read_to_string(&csv).unwrap();
    let cols = header.lines().next().unwrap().split(',').count();
    assert_eq!(cols, 7 + feature_names().len());
    write_sidecar(dir.path().join("features.json"), &a, &ExtractConfig::default(), None).unwrap();
}

#[test]
fn missing_procedure_drops_sample_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let opts = CorpusOptions { participants: 1, rating_participants: 0, ..Default::default() };
    let g = gen_corpus(dir.path(), &class_templates(), 10, &opts, 3).unwrap();
    let mut manifest = g.manifest.clone();
    let victim = manifest
        .trials
        .iter()
        .position(|t| t.surface_id == 4 && t.procedure == tactile_core::dataio::Procedure::Sliding)
        .unwrap();
    manifest.trials.remove(victim);
    write_manifest(dir.path(), &manifest).unwrap();
    let corpus = load_corpus_with(dir.path(), &LoadOptions { require_full_design: false }).unwrap();
    let a = assemble_features(&corpus, &ExtractConfig::default()).unwrap();
    assert_eq!(a.vectors.len(), 9);
    assert!(a.vectors.iter().all(|v| v.surface_id != 4));
    assert_eq!(a.warnings.len(), 1);
    assert!(a.warnings[0].contains("no sliding trial"), "{}", a.warnings[0]);
}

#[test]
fn extracted_features_track_generating_parameters() {
    use std::collections::BTreeMap;
    use tactile_core::analysis::spearman;
    use tactile_core::synth::TRUTH_FILE;

    let dir = tempfile::tempdir().unwrap();
    let opts = CorpusOptions { participants: 1, rating_participants: 0, noise_scale: 0.1, ..Default::default() };
    gen_corpus(dir.path(), &class_templates(), 50, &opts, 5).unwrap();
    let a = assemble_features(&load_corpus(dir.path()).unwrap(), &ExtractConfig::default()).unwrap();
    let mut rd = csv::Reader::from_path(dir.path().join(TRUTH_FILE)).unwrap();
    let headers = rd.headers().unwrap().clone();
    let mut truth: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec.unwrap();
        for (h, v) in headers.iter().zip(rec.iter()) {
            if let Ok(x) = v.parse::<f64>() {
                truth.entry(h.to_string()).or_default().push(x);
            }
        }
    }
    let pairs = [
        ("press_a", "aP1"),
        ("press_b", "bP1"),
        ("lift_a", "aP2"),
        ("flux_a", "aH1"),
        ("flux_b", "bH1"),
        ("power_b", "bH2"),
        ("temp_b", "bT"),
        ("temp_c", "cT"),
        ("temp_d", "dT"),
        ("friction", "s13"),
        ("dominant_freq_hz", "s20"),
    ];
    for (t, f) in pairs {
        let extracted: Vec<f64> = a.vectors.iter().map(|v| v.get(f).unwrap()).collect();
        let rho = spearman(&truth[t], &extracted).unwrap();
        assert!(rho > 0.9, "{t} vs {f}: rho {rho}");
    }
}
