use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use tactile_core::analysis::{ablation, importance_for, null_model, topk_curve};
use tactile_core::dataio::{MaterialClass, RatingMatrix};
use tactile_core::extract::{assemble_features, ExtractConfig, FeatureVector, N_FEATURES};
use tactile_core::harness::{
    evaluate, features_dataset, leakage_canary, run_model1, run_model2, run_model3, shuffled_labels,
    GroupSelection, Model2Samples, Protocol, NULL_MODEL,
};
use tactile_core::dataio::load_corpus;
use tactile_core::models::{Dataset, Hyperparams, LearnerKind, Target};
use tactile_core::rng::rng_from;
use tactile_core::synth::{class_templates, gen_corpus, CorpusOptions};

fn quick_hp() -> Hyperparams {
    Hyperparams { n_trees: 60, ..Default::default() }
}

fn protocol(repeats: usize) -> Protocol {
    Protocol { repeats, ..Default::default() }
}

/// 50 surfaces × `participants` vectors of uniform noise; `surface_value`
/// overwrites feature 0 with a per-surface constant when given.
fn noise_vectors(participants: usize, surface_value: Option<&[f64]>, seed: u64) -> Vec<FeatureVector> {
    let mut rng = rng_from(seed);
    let mut out = Vec::new();
    for p in 0..participants {
        for s in 1..=50u32 {
            let mut values: Vec<f64> = (0..N_FEATURES).map(|_| rng.random::<f64>()).collect();
            if let Some(u) = surface_value {
                values[0] = u[s as usize - 1];
            }
            out.push(FeatureVector {
                participant_id: format!("P{p}"),
                surface_id: s,
                trial_index: 0,
                trial_ids: Default::default(),
                material: MaterialClass::ALL[(s as usize - 1) / 5],
                values,
                flags: BTreeMap::new(),
            });
        }
    }
    out
}

fn ratings_from(averaged: Vec<[f64; 5]>) -> RatingMatrix {
    RatingMatrix {
        surfaces: (1..=50).collect(),
        per_participant: BTreeMap::from([("R01".to_string(), averaged.clone())]),
        averaged,
        constant_columns: Vec::new(),
    }
}

/// Evenly spread targets in (0, 1), shuffled across surfaces.
fn spread_targets(seed: u64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect();
    t.shuffle(&mut rng_from(seed));
    t
}

#[test]
fn model1_linear_target_is_learned() {
    let u = spread_targets(1);
    let vectors = noise_vectors(2, Some(&u), 2);
    let ratings = ratings_from(u.iter().map(|&v| [v, 0.5 * v + 0.2, v, v, v]).collect());
    let hp = Hyperparams { max_features: Some(N_FEATURES), ..quick_hp() };
    let reports = run_model1(&vectors, &ratings, &protocol(10), GroupSelection::All, &hp).unwrap();
    assert_eq!(reports.len(), 10);
    let rf = &reports[0];
    assert_eq!(rf.model, "rf_regressor");
    assert!(rf.mean("r2").unwrap() > 0.95, "{:?}", rf.aggregate);
    assert!(rf.mean("mse").unwrap() < 0.005);
    assert_eq!(reports[1].model, NULL_MODEL);
}

#[test]
fn model1_null_baseline_and_permuted_targets() {
    let vectors = noise_vectors(2, None, 3);
    let u = spread_targets(4);
    let ratings = ratings_from(u.iter().map(|&v| [v; 5]).collect());
    let reports = run_model1(&vectors, &ratings, &protocol(20), GroupSelection::Thermal, &quick_hp()).unwrap();
    let null_mse: Vec<f64> = reports.iter().filter(|r| r.model == NULL_MODEL).map(|r| r.mean("mse").unwrap()).collect();
    let overall = null_mse.iter().sum::<f64>() / null_mse.len() as f64;
    assert!((overall - 1.0 / 6.0).abs() < 0.01, "{overall}");
    for r in reports.iter().filter(|r| r.model != NULL_MODEL) {
        assert!(r.mean("r2").unwrap() <= 0.1, "{} {:?}", r.task, r.aggregate);
    }
}

#[test]
fn model1_join_failure() {
    let vectors = noise_vectors(1, None, 5);
    let mut ratings = ratings_from(vec![[0.5; 5]; 50]);
    ratings.surfaces[10] = 99;
    let err = run_model1(&vectors, &ratings, &protocol(2), GroupSelection::All, &quick_hp()).unwrap_err();
    assert!(err.to_string().contains("surface 11"), "{err}");
}

fn separated_ratings() -> (RatingMatrix, BTreeMap<u32, MaterialClass>) {
    let mut rng = rng_from(6);
    let averaged = (0..50)
        .map(|s| {
            let c = (s / 5) as f64;
            let mut row = [0.0; 5];
            for (j, r) in row.iter_mut().enumerate() {
                *r = (c + 0.1 * rng.random::<f64>()) / 10.0 * if j % 2 == 0 { 1.0 } else { 0.5 };
            }
            row
        })
        .collect();
    let materials = (1..=50u32).map(|s| (s, MaterialClass::ALL[(s as usize - 1) / 5])).collect();
    (ratings_from(averaged), materials)
}

#[test]
fn model2_separated_classes() {
    let (ratings, materials) = separated_ratings();
    let kinds = [LearnerKind::RfClassifier, LearnerKind::GaussianNb, LearnerKind::Knn];
    let reports = run_model2(&ratings, &materials, Model2Samples::Surfaces, &protocol(20), &kinds, &quick_hp()).unwrap();
    assert_eq!(reports.len(), 3);
    assert_eq!(reports[0].mean("accuracy"), Some(1.0));
    for r in &reports {
        assert!(r.mean("accuracy").unwrap() > 0.9, "{} {:?}", r.model, r.aggregate);
    }
    let per = run_model2(&ratings, &materials, Model2Samples::ParticipantSurfaces, &protocol(2), &kinds[..1], &quick_hp())
        .unwrap();
    assert_eq!(per[0].per_repeat.len(), 2);
    assert!(run_model2(&ratings, &materials, Model2Samples::Surfaces, &protocol(1), &[LearnerKind::RfRegressor], &quick_hp())
        .is_err());
}

#[test]
fn shuffled_labels_fall_to_chance() {
    let (ratings, _) = separated_ratings();
    let x: Vec<Vec<f64>> = ratings.averaged.iter().map(|r| r.to_vec()).collect();
    let labels: Vec<usize> = (0..50).map(|s| s / 5).collect();
    let data = Dataset::new(x, Target::Classes { labels, n_classes: 10 }, (0..5).map(|j| format!("r{j}")).collect()).unwrap();
    let mut accs = Vec::new();
    for seed in 0..5 {
        let shuffled = shuffled_labels(&data, seed);
        assert_ne!(shuffled.labels(), data.labels());
        let r = evaluate(&shuffled, None, LearnerKind::RfClassifier, &quick_hp(), &protocol(40), "shuffled").unwrap();
        accs.push(r.mean("accuracy").unwrap());
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    assert!((mean - 0.1).abs() <= 0.05, "{accs:?}");
}

#[test]
fn leakage_canary_stays_at_chance() {
    let labels: Vec<usize> = (0..100).map(|i| i % 10).collect();
    for kind in [LearnerKind::RfClassifier, LearnerKind::Logistic, LearnerKind::Knn] {
        let r = leakage_canary(&labels, 10, 5, kind, &quick_hp(), &protocol(30)).unwrap();
        let acc = r.mean("accuracy").unwrap();
        assert!(acc < 0.2, "{kind}: {acc}");
    }
}

#[test]
fn model3_runs_every_group_and_kind() {
    let vectors = noise_vectors(2, None, 7);
    let reports = run_model3(
        &vectors,
        &protocol(3),
        &[LearnerKind::RfClassifier, LearnerKind::GaussianNb],
        &GroupSelection::ALL,
        &quick_hp(),
    )
    .unwrap();
    assert_eq!(reports.len(), 8);
    assert_eq!(reports[0].task, "model3/pressing");
    assert_eq!(reports[0].n_features, 6);
    assert_eq!(reports[7].n_features, 98);
}

#[test]
fn ablation_all_matches_unablated() {
    let vectors = noise_vectors(2, None, 8);
    let p = protocol(5);
    let (data, groups) = features_dataset(&vectors, GroupSelection::All).unwrap();
    let full = evaluate(&data, Some(&groups), LearnerKind::RfClassifier, &quick_hp(), &p, "x").unwrap();
    let abl = ablation(&vectors, &["all"], LearnerKind::RfClassifier, &quick_hp(), &p).unwrap();
    assert_eq!(abl[0].per_repeat, full.per_repeat);
    assert!(ablation(&vectors, &["texture"], LearnerKind::RfClassifier, &quick_hp(), &p).is_err());
}

/// 10 classes × 10 samples; the first `informative` columns separate the
/// classes, the rest are noise.
fn informative_dataset(informative: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = rng_from(seed);
    let labels: Vec<usize> = (0..100).map(|i| i % 10).collect();
    let x = labels
        .iter()
        .map(|&c| {
            (0..p)
                .map(|j| if j < informative { c as f64 + 0.3 * rng.random::<f64>() } else { rng.random::<f64>() })
                .collect()
        })
        .collect();
    Dataset::new(x, Target::Classes { labels, n_classes: 10 }, (0..p).map(|j| format!("f{j:03}")).collect()).unwrap()
}

#[test]
fn topk_recovers_informative_features() {
    let data = informative_dataset(5, 98, 9);
    let hp = Hyperparams::default();
    let p = protocol(10);
    let ranking = importance_for(&data, LearnerKind::RfClassifier, &hp, 0).unwrap();
    let mut top5 = ranking.top(5);
    top5.sort();
    assert_eq!(top5, ["f000", "f001", "f002", "f003", "f004"]);
    let curve = topk_curve(&data, None, &ranking, &[5, 98], LearnerKind::RfClassifier, &hp, &p).unwrap();
    assert!((curve[0].accuracy.mean - curve[1].accuracy.mean).abs() <= 0.02, "{curve:?}");
    let full = evaluate(&data, None, LearnerKind::RfClassifier, &hp, &p, "full").unwrap();
    assert_eq!(curve[1].accuracy, full.aggregate["accuracy"]);

    let one = informative_dataset(1, 20, 10);
    let ranking = importance_for(&one, LearnerKind::RfClassifier, &hp, 0).unwrap();
    let curve = topk_curve(&one, None, &ranking, &[1], LearnerKind::RfClassifier, &hp, &p).unwrap();
    assert_eq!(curve[0].features, ["f000"]);
    assert!(curve[0].accuracy.mean > 0.1);
    assert!(topk_curve(&one, None, &ranking, &[], LearnerKind::RfClassifier, &hp, &p).is_err());
    assert!(topk_curve(&one, None, &ranking, &[21], LearnerKind::RfClassifier, &hp, &p).is_err());
}

#[test]
fn thermal_only_signal_favours_thermal_group() {
    // Every class shares class 0's pressing and sliding behavior.
    let base = class_templates();
    let templates: Vec<_> = base
        .iter()
        .map(|t| {
            let mut t = t.clone();
            t.pressing = base[0].pressing.clone();
            t.sliding = base[0].sliding.clone();
            t
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let opts = CorpusOptions { participants: 2, rating_participants: 0, ..Default::default() };
    gen_corpus(dir.path(), &templates, 50, &opts, 31).unwrap();
    let a = assemble_features(&load_corpus(dir.path()).unwrap(), &ExtractConfig::default()).unwrap();
    let reports = ablation(
        &a.vectors,
        &["pressing", "thermal", "sliding"],
        LearnerKind::RfClassifier,
        &quick_hp(),
        &protocol(20),
    )
    .unwrap();
    let acc: Vec<f64> = reports.iter().map(|r| r.mean("accuracy").unwrap()).collect();
    assert!(acc[1] > acc[0] + 0.2 && acc[1] > acc[2] + 0.2, "{acc:?}");
}

#[test]
fn evaluation_ignores_thread_count() {
    let data = informative_dataset(3, 10, 11);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evaluate(&data, None, LearnerKind::RfClassifier, &quick_hp(), &protocol(8), "t").unwrap())
    };
    assert_eq!(serde_json::to_string(&run(1)).unwrap(), serde_json::to_string(&run(4)).unwrap());
}

#[test]
fn null_model_draws_in_unit_interval() {
    assert!(null_model(10_000, 2).unwrap().iter().all(|v| (0.0..1.0).contains(v)));
}
