//! Repeated hold-out evaluation of the sensation regressors and the
//! material classifiers on a synthetic corpus.

use tactile_core::dataio::{load_corpus, normalize_ratings, read_ratings};
use tactile_core::extract::{assemble_features, ExtractConfig};
use tactile_core::harness::{run_model1, run_model3, GroupSelection, Protocol};
use tactile_core::models::{Hyperparams, LearnerKind};
use tactile_core::synth::{class_templates, gen_corpus, CorpusOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let opts = CorpusOptions { participants: 1, rating_participants: 6, ..Default::default() };
    gen_corpus(dir.path(), &class_templates(), 50, &opts, 21)?;
    let corpus = load_corpus(dir.path())?;
    let ratings = normalize_ratings(&read_ratings(dir.path().join("ratings.json"))?)?;
    let vectors = assemble_features(&corpus, &ExtractConfig::default())?.vectors;

    let protocol = Protocol { repeats: 20, ..Default::default() };
    let hp = Hyperparams { n_trees: 100, ..Default::default() };

    for r in run_model1(&vectors, &ratings, &protocol, GroupSelection::All, &hp)? {
        println!("{:<32} {:<14} mse {:.4}", r.task, r.model, r.mean("mse").unwrap_or(f64::NAN));
    }
    let kinds = [LearnerKind::RfClassifier, LearnerKind::Knn];
    for r in run_model3(&vectors, &protocol, &kinds, &GroupSelection::ALL, &hp)? {
        println!("{:<32} {:<14} accuracy {:.3}", r.task, r.model, r.mean("accuracy").unwrap_or(f64::NAN));
    }
    Ok(())
}
