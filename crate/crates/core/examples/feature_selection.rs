//! Feature-group ablation and the top-k importance curve.

use tactile_core::analysis::{ablation, importance_for, topk_curve};
use tactile_core::dataio::load_corpus;
use tactile_core::extract::{assemble_features, ExtractConfig};
use tactile_core::harness::{features_dataset, GroupSelection, Protocol};
use tactile_core::models::{Hyperparams, LearnerKind};
use tactile_core::synth::{class_templates, gen_corpus, CorpusOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let opts = CorpusOptions { participants: 1, rating_participants: 0, ..Default::default() };
    gen_corpus(dir.path(), &class_templates(), 50, &opts, 5)?;
    let vectors = assemble_features(&load_corpus(dir.path())?, &ExtractConfig::default())?.vectors;

    let protocol = Protocol { repeats: 10, ..Default::default() };
    let hp = Hyperparams { n_trees: 100, ..Default::default() };
    let kind = LearnerKind::RfClassifier;

    for r in ablation(&vectors, &["pressing", "thermal", "sliding"], kind, &hp, &protocol)? {
        println!("{:<20} accuracy {:.3}", r.task, r.mean("accuracy").unwrap_or(f64::NAN));
    }

    let (data, groups) = features_dataset(&vectors, GroupSelection::All)?;
    let ranking = importance_for(&data, kind, &hp, protocol.base_seed)?;
    println!("top features {:?}", ranking.top(5));
    for pt in topk_curve(&data, Some(&groups), &ranking, &[1, 3, 5, 10, 20, 98], kind, &hp, &protocol)? {
        println!("k={:<3} accuracy {:.3} ± {:.3}", pt.k, pt.accuracy.mean, pt.accuracy.std);
    }
    Ok(())
}
