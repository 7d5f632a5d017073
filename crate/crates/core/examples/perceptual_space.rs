//! PCA of averaged ratings, MDS of participant distances and the Spearman
//! matrix between adjective scales.

use tactile_core::analysis::{classical_mds, participant_distance, pca, spearman_matrix};
use tactile_core::dataio::{normalize_ratings, AdjectivePair};
use tactile_core::synth::{class_templates, gen_corpus, CorpusOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let opts = CorpusOptions { participants: 1, rating_participants: 8, ..Default::default() };
    let generated = gen_corpus(dir.path(), &class_templates(), 50, &opts, 3)?;
    let ratings = normalize_ratings(generated.ratings.as_deref().unwrap())?;

    let rows: Vec<Vec<f64>> = ratings.averaged.iter().map(|r| r.to_vec()).collect();
    let p = pca(&rows, 5, true)?;
    println!("explained variance {:.3?}", p.explained_variance_ratio);

    let rho = spearman_matrix(&rows)?;
    for (pair, row) in AdjectivePair::ALL.iter().zip(&rho.matrix) {
        println!("{:<16} {:+.2?}", pair.name(), row);
    }

    let d = participant_distance(&ratings, AdjectivePair::RoughSmooth)?;
    let m = classical_mds(&d.dist, 2)?;
    for (id, c) in d.ids.iter().zip(&m.coords) {
        println!("{id}: ({:+.3}, {:+.3})", c[0], c[1]);
    }
    Ok(())
}
