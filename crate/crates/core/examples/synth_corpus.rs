//! Generate a small synthetic corpus and load it back.
//!
//! cargo run --example synth_corpus -- /tmp/tactile-corpus

use tactile_core::dataio::load_corpus;
use tactile_core::synth::{class_templates, gen_corpus, CorpusOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args().nth(1).unwrap_or_else(|| "target/example-corpus".into());
    let opts = CorpusOptions { participants: 1, ..Default::default() };
    let generated = gen_corpus(&root, &class_templates(), 50, &opts, 7)?;
    println!("wrote {} trials to {root}", generated.manifest.trials.len());

    let corpus = load_corpus(&root)?;
    println!("trials per procedure {:?}", corpus.manifest.count_by_procedure());
    let first = corpus.load_recording(&corpus.trials()[0])?;
    println!(
        "first trial {}: {} at {} Hz, {} samples, channels {:?}",
        first.trial_id,
        first.procedure,
        first.sample_rate_hz,
        first.len(),
        first.channels.keys().map(|c| c.name()).collect::<Vec<_>>()
    );
    Ok(())
}
