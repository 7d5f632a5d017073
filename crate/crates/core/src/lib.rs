//! Tactile material-perception pipeline.
//!
//! Recordings of a fingertip pressing, resting on, and sliding over a surface
//! are reduced to a fixed registry of 98 features. Those features feed three
//! models: a regressor from features to normalized sensation ratings, a
//! classifier from ratings to material class, and a classifier from
//! features straight to material class. The crate also carries the analyses
//! used to interpret them (PCA, classical MDS, Spearman matrices, top-k
//! feature curves, feature-group ablation) and a synthetic corpus generator
//! whose known generating parameters act as ground truth.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod analysis;
pub mod cli;
pub mod curvefit;
pub mod dataio;
pub mod dsp;
pub mod error;
pub mod extract;
pub mod harness;
pub mod meta;
pub mod models;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
