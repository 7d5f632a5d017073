//! Per-procedure feature extractors and the fixed 98-feature registry.

mod assemble;
mod pressing;
mod sliding;
mod thermal;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curvefit::{FitConfig, FitResult};
use crate::dataio::{MaterialClass, Procedure};
use crate::dsp::MfccConfig;
use crate::error::{Error, Result};

pub use assemble::{
    assemble_features, extract_trial, read_features_csv, write_features_csv, write_sidecar,
    Assembly, FeatureTable, Sidecar, TrialFeatures,
};
pub use pressing::{extract_pressing, segment_pressing, PressingSegments};
pub use sliding::{extract_sliding, sliding_span};
pub use thermal::{extract_heatflux, extract_temperature, flux_segments, FluxSegments};

/// Feature groups used for ablation; each corresponds to one procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Pressing,
    Thermal,
    Sliding,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 3] = [FeatureGroup::Pressing, FeatureGroup::Thermal, FeatureGroup::Sliding];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Pressing => "pressing",
            FeatureGroup::Thermal => "thermal",
            FeatureGroup::Sliding => "sliding",
        }
    }

    pub fn procedure(self) -> Procedure {
        match self {
            FeatureGroup::Pressing => Procedure::Pressing,
            FeatureGroup::Thermal => Procedure::StaticContact,
            FeatureGroup::Sliding => Procedure::Sliding,
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature group '{s}'")))
    }
}

pub const PRESSING_FEATURES: [&str; 6] = ["aP1", "bP1", "aP2", "bP2", "cP2", "deltaP"];
pub const HEATFLUX_FEATURES: [&str; 6] = ["aH1", "bH1", "cH1", "aH2", "bH2", "cH2"];
pub const TEMPERATURE_FEATURES: [&str; 9] =
    ["aT", "bT", "cT", "dT", "aT0", "bT0", "cT0", "dT0", "madPeak"];

/// Descriptor keys of the sliding force block, in registry order.
pub const FORCE_DESCRIPTORS: [&str; 25] = [
    "s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "s12", "s13", "s14",
    "s15", "s16", "s17", "s18", "s19", "s20", "s21", "s22", "s23", "s24", "s25",
];

/// Force descriptor key behind each `sAccN`: the force set without s13.
pub const ACCEL_SOURCE: [&str; 24] = [
    "s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "s12", "s14", "s15",
    "s16", "s17", "s18", "s19", "s20", "s21", "s22", "s23", "s24", "s25",
];

pub const N_FEATURES: usize = 98;

/// All 98 feature names in canonical order.
pub fn feature_names() -> &'static [String] {
    static NAMES: std::sync::OnceLock<Vec<String>> = std::sync::OnceLock::new();
    NAMES.get_or_init(|| {
        let mut v: Vec<String> = PRESSING_FEATURES
            .iter()
            .chain(&HEATFLUX_FEATURES)
            .chain(&TEMPERATURE_FEATURES)
            .chain(&FORCE_DESCRIPTORS)
            .map(|s| s.to_string())
            .collect();
        v.extend((1..=24).map(|i| format!("sAcc{i}")));
        v.extend((1..=14).map(|i| format!("mfccF{i}")));
        v.extend((1..=14).map(|i| format!("mfccA{i}")));
        debug_assert_eq!(v.len(), N_FEATURES);
        v
    })
}

pub fn feature_index(name: &str) -> Option<usize> {
    feature_names().iter().position(|n| n == name)
}

pub fn group_of_index(i: usize) -> FeatureGroup {
    match i {
        0..6 => FeatureGroup::Pressing,
        6..21 => FeatureGroup::Thermal,
        _ => FeatureGroup::Sliding,
    }
}

pub fn group_of(name: &str) -> Option<FeatureGroup> {
    feature_index(name).map(group_of_index)
}

/// Indices of the registry features belonging to `group`.
pub fn group_indices(group: FeatureGroup) -> Vec<usize> {
    (0..N_FEATURES).filter(|&i| group_of_index(i) == group).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentLabel {
    PressPhase,
    LiftPhase,
    FluxDrop,
    FluxStabilize,
    TempDrop,
}

/// Half-open index range `[start, end)` into a recording's channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentBounds {
    pub start: usize,
    pub end: usize,
    pub label: SegmentLabel,
}

impl SegmentBounds {
    pub fn new(start: usize, end: usize, label: SegmentLabel) -> Result<Self> {
        if start >= end {
            return Err(Error::Segmentation(format!(
                "empty {label:?} segment [{start}, {end})"
            )));
        }
        Ok(Self { start, end, label })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

/// Where the 30 s flux stabilization window is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxWindowOrigin {
    Onset,
    TrialStart,
}

/// Extractor constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractConfig {
    pub contact_threshold_n: f64,
    pub contact_debounce_s: f64,
    /// Fraction of peak force treated as the hold plateau.
    pub plateau_fraction: f64,
    pub hysteresis_grid_points: usize,
    /// Indentation range below which the pressing fit is flagged low-signal.
    pub low_signal_mm: f64,
    pub smooth_window_s: f64,
    /// The smoothed flux derivative must stay negative this long to mark onset.
    pub onset_run_s: f64,
    pub flux_window_s: f64,
    pub flux_window_origin: FluxWindowOrigin,
    pub min_stabilize_s: f64,
    pub mad_window: usize,
    pub sliding_min_normal_n: f64,
    pub bandpass_low_hz: f64,
    pub bandpass_high_hz: f64,
    pub mfcc: MfccConfig,
    pub fit: FitConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            contact_threshold_n: 0.1,
            contact_debounce_s: 0.05,
            plateau_fraction: 0.995,
            hysteresis_grid_points: 50,
            low_signal_mm: 1e-6,
            smooth_window_s: 0.5,
            onset_run_s: 0.5,
            flux_window_s: 30.0,
            flux_window_origin: FluxWindowOrigin::Onset,
            min_stabilize_s: 5.0,
            mad_window: 25,
            sliding_min_normal_n: 0.05,
            bandpass_low_hz: 20.0,
            bandpass_high_hz: 1000.0,
            mfcc: MfccConfig::default(),
            fit: FitConfig::default(),
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("contact_threshold_n", self.contact_threshold_n),
            ("contact_debounce_s", self.contact_debounce_s),
            ("smooth_window_s", self.smooth_window_s),
            ("onset_run_s", self.onset_run_s),
            ("flux_window_s", self.flux_window_s),
            ("bandpass_low_hz", self.bandpass_low_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.plateau_fraction > 0.0 && self.plateau_fraction <= 1.0) {
            return Err(Error::Config("plateau_fraction must be in (0, 1]".into()));
        }
        if self.bandpass_high_hz <= self.bandpass_low_hz {
            return Err(Error::Config("bandpass_high_hz must exceed bandpass_low_hz".into()));
        }
        if self.hysteresis_grid_points < 2 || self.mad_window == 0 {
            return Err(Error::Config("grid points ≥ 2 and mad_window ≥ 1 required".into()));
        }
        if self.mfcc.n_coeffs != 14 {
            return Err(Error::Config("the registry expects 14 MFCCs".into()));
        }
        Ok(())
    }

    /// Smoothing window in samples, rounded to odd.
    pub(crate) fn smooth_window(&self, fs: f64) -> usize {
        let w = (self.smooth_window_s * fs).round().max(1.0) as usize;
        if w % 2 == 0 { w + 1 } else { w }
    }
}

/// The output of one extractor: named values in registry order, per-feature
/// flags, fit diagnostics and the segments used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Extracted {
    pub values: Vec<(String, f64)>,
    pub flags: BTreeMap<String, Vec<String>>,
    pub fits: BTreeMap<String, FitResult>,
    pub segments: Vec<SegmentBounds>,
}

impl Extracted {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub(crate) fn push(&mut self, name: &str, value: f64) {
        self.values.push((name.to_string(), value));
    }

    pub(crate) fn flag(&mut self, names: &[&str], flag: &str) {
        for n in names {
            let set = self.flags.entry(n.to_string()).or_default();
            if !set.iter().any(|f| f == flag) {
                set.push(flag.to_string());
            }
        }
    }

    pub(crate) fn merge(&mut self, other: Extracted) {
        self.values.extend(other.values);
        for (k, v) in other.flags {
            let set = self.flags.entry(k).or_default();
            for f in v {
                if !set.contains(&f) {
                    set.push(f);
                }
            }
        }
        self.fits.extend(other.fits);
        self.segments.extend(other.segments);
    }
}

/// One assembled sample: key, label, 98 values in registry order, flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub participant_id: String,
    pub surface_id: u32,
    /// Position of the trial tuple among this participant's trials on this surface.
    pub trial_index: usize,
    /// Source trial ids: pressing, static contact, sliding.
    pub trial_ids: [String; 3],
    pub material: MaterialClass,
    pub values: Vec<f64>,
    pub flags: BTreeMap<String, Vec<String>>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }

    pub fn key(&self) -> String {
        format!("{}/s{}/t{}", self.participant_id, self.surface_id, self.trial_index)
    }
}

/// Fit, falling back to zeros with a flag when the data cannot be fitted.
pub(crate) fn fit_or_flag(
    out: &mut Extracted,
    fit_name: &str,
    names: &[&str],
    kind: crate::curvefit::ModelKind,
    x: &[f64],
    y: &[f64],
    fixed: &[Option<f64>],
    cfg: &FitConfig,
) -> Option<FitResult> {
    match crate::curvefit::fit_with(kind, x, y, None, fixed, cfg) {
        Ok(f) => {
            if !f.converged {
                out.flag(names, "fit_not_converged");
            }
            if !f.r_squared_defined {
                out.flag(names, "r_squared_undefined");
            }
            out.fits.insert(fit_name.to_string(), f.clone());
            Some(f)
        }
        Err(e) => {
            log::debug!("{fit_name} fit failed: {e}");
            out.flag(names, "fit_failed");
            None
        }
    }
}
