//! Synthetic recordings with known generating parameters.
//!
//! Signal shapes follow the same parametric families the extractors fit, so
//! extraction applied to noiseless output recovers the generating values.
//! These are phenomenological shapes, not a physical simulation.

mod corpus;
mod curves;
mod signals;

use serde::{Deserialize, Serialize};

use crate::dataio::MaterialClass;

pub use corpus::{
    class_templates, gen_corpus, gen_ratings, jitter_spec, CorpusOptions, GeneratedCorpus,
    RATINGS_FILE, TRUTH_FILE,
};
pub use curves::{curve_domain, gen_curve, recovery_grid};
pub use signals::{
    gen_pressing, gen_sliding, gen_thermal, PressingTimeline, THERMAL_CONTACT_S,
};

/// Pressing: press depth `a(1 - e^(-bF))`, lift depth `a'(1 - e^(-b'F)) + c'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressingParams {
    pub press_a: f64,
    pub press_b: f64,
    pub lift_a: f64,
    pub lift_b: f64,
    pub lift_c: f64,
    /// Raw indentation reading before contact (removed by re-zeroing).
    pub depth_offset_mm: f64,
}

/// Static contact: heat flux is flat, then a logistic drop `a/(1+e^(-b(t-c)))`
/// measured from contact, then a power-law recovery `a'·x^b' + c'` from the
/// minimum (`c'` follows from continuity). Skin temperature is flat at the 4PL
/// `a`, then follows the 4PL until [`ThermalParams::rewarm_s`], then drifts
/// back up quadratically from its value there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub flux_a: f64,
    pub flux_b: f64,
    pub flux_c: f64,
    /// Time from contact to the flux minimum, seconds.
    pub flux_min_s: f64,
    pub power_a: f64,
    pub power_b: f64,
    pub temp_a: f64,
    pub temp_b: f64,
    pub temp_c: f64,
    pub temp_d: f64,
    /// Quadratic rewarming coefficient, °C/s².
    pub temp_drift: f64,
}

impl ThermalParams {
    /// Time after contact at which the skin starts to rewarm.
    pub fn rewarm_s(&self) -> f64 {
        5.0 * self.temp_c
    }

    /// Logistic flux at time `x` after contact.
    pub fn flux_logistic(&self, x: f64) -> f64 {
        self.flux_a / (1.0 + (-self.flux_b * (x - self.flux_c)).exp())
    }

    /// The power-law offset that makes the flux continuous at the minimum,
    /// given the extractor's one-sample x shift.
    pub fn power_c(&self, fs: f64) -> f64 {
        let dt = 1.0 / fs;
        let t_min = (self.flux_min_s * fs).round() / fs;
        self.flux_logistic(t_min) - self.power_a * dt.powf(self.power_b)
    }
}

/// One sinusoidal vibration component of the sliding signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vibration {
    pub freq_hz: f64,
    pub amplitude_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlidingParams {
    pub friction: f64,
    pub normal_force_n: f64,
    pub vibrations: Vec<Vibration>,
    /// Acceleration per newton of vibration, one gain per axis.
    pub accel_gain: [f64; 3],
}

/// Additive Gaussian noise standard deviations per channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub force_n: f64,
    pub depth_mm: f64,
    pub flux: f64,
    pub temp_c: f64,
    pub accel: f64,
}

/// Everything needed to generate the three recordings of one surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub material: MaterialClass,
    pub pressing: PressingParams,
    pub thermal: ThermalParams,
    pub sliding: SlidingParams,
    pub noise: NoiseSpec,
}
