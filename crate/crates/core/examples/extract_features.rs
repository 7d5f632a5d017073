//! Segment one pressing trial, then build the full feature table.

use tactile_core::dataio::{load_corpus, Procedure};
use tactile_core::extract::{assemble_features, extract_pressing, ExtractConfig};
use tactile_core::synth::{class_templates, gen_corpus, CorpusOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let opts = CorpusOptions { participants: 1, rating_participants: 0, ..Default::default() };
    gen_corpus(dir.path(), &class_templates(), 50, &opts, 11)?;
    let corpus = load_corpus(dir.path())?;
    let cfg = ExtractConfig::default();

    let entry = corpus.trials().iter().find(|t| t.procedure == Procedure::Pressing).unwrap();
    let press = &corpus.load_recording(entry)?;
    let ex = extract_pressing(press, &cfg)?;
    for s in &ex.segments {
        println!("{:?}: samples {}..{}", s.label, s.start, s.end);
    }
    for (name, value) in &ex.values {
        println!("{name:>6} {value:.4}");
    }

    let table = assemble_features(&corpus, &cfg)?;
    println!("{} feature vectors, {} warnings", table.vectors.len(), table.warnings.len());
    Ok(())
}
