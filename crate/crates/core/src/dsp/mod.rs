//! Signal-processing primitives shared by the feature extractors.
//!
//! Everything here is a pure function over `&[f64]`; nothing streams.

mod descriptors;
mod filter;
mod mfcc;
mod smoothing;
mod spectrum;

pub use descriptors::{time_descriptors, DescriptorSet};
pub use filter::{bandpass, Butterworth};
pub use mfcc::{mfcc, MfccConfig};
pub use smoothing::{median, moving_average, moving_mad};
pub use spectrum::{power_spectrum, spectral_descriptors, Spectrum, BANDS_HZ};

pub(crate) fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}
