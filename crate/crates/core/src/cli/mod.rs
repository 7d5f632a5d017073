//! Command-line front end. Every subcommand reads a [`RunConfig`], applies
//! flag overrides, and writes CSV + JSON artifacts stamped with the config
//! hash and seed.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use config::{Paths, RunConfig, SynthConfig, TaskConfig};
pub use report::{merge_reports, SummaryRow};

#[derive(Debug, Parser)]
#[command(name = "tactile", version, about = "Tactile feature extraction, models and analyses")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run seed; every split, model and synthetic draw derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of processors.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Corpus root holding manifest.json.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Raw ratings JSON.
    #[arg(long, global = true)]
    ratings: Option<PathBuf>,
    /// Features CSV written by `extract`.
    #[arg(long, global = true)]
    features: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Check a corpus (and ratings, if given) against the schema.
    Validate,
    /// Generate a synthetic corpus with ground truth.
    Synth,
    /// Extract the 98-feature table from a corpus.
    Extract,
    /// Features to sensation ratings, one regressor per adjective pair.
    Model1,
    /// Sensation ratings to material class.
    Model2,
    /// Features to material class, per learner and feature group.
    Model3,
    /// Feature-group ablation.
    Ablate,
    /// Accuracy as a function of the number of top-ranked features.
    Topk,
    /// PCA of the averaged ratings and/or the feature table.
    Pca,
    /// Classical MDS of participants, per adjective pair.
    Mds,
    /// Spearman correlations between adjective pairs.
    Spearman,
    /// Merge JSON reports from the given directories into one summary CSV.
    Report {
        /// Merge even when config hashes differ.
        #[arg(long)]
        force: bool,
        /// Directories to scan; defaults to --out.
        inputs: Vec<PathBuf>,
    },
}

/// Exit code for an error: 1 for bad input or configuration, 2 for
/// failures while running.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ManifestNotFound(_)
        | Error::MissingFile { .. }
        | Error::Schema { .. }
        | Error::Channel { .. }
        | Error::Ratings(_)
        | Error::InvalidInput(_)
        | Error::Config(_)
        | Error::Csv(_)
        | Error::Json(_) => 1,
        Error::Segmentation(_) | Error::Model(_) | Error::Io { .. } => 2,
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> crate::Result<()> {
    let mut cfg = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let c = cli.common;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.protocol.base_seed = cfg.seed;
    for (slot, flag) in [
        (&mut cfg.paths.out, c.out),
        (&mut cfg.paths.corpus, c.corpus),
        (&mut cfg.paths.ratings, c.ratings),
        (&mut cfg.paths.features, c.features),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    cfg.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Validate => commands::validate(&cfg),
        Command::Synth => commands::synth(&cfg),
        Command::Extract => commands::extract(&cfg),
        Command::Model1 => commands::model1(&cfg),
        Command::Model2 => commands::model2(&cfg),
        Command::Model3 => commands::model3(&cfg),
        Command::Ablate => commands::ablate(&cfg),
        Command::Topk => commands::topk(&cfg),
        Command::Pca => commands::pca(&cfg),
        Command::Mds => commands::mds(&cfg),
        Command::Spearman => commands::spearman(&cfg),
        Command::Report { force, inputs } => commands::report(&cfg, &inputs, force),
    })
}
