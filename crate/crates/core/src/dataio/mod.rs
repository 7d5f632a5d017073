//! Canonical data model for recordings and psychophysical ratings, plus the
//! on-disk corpus layout (JSON manifest + one CSV per trial).

mod corpus;
mod ratings;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use corpus::{
    load_corpus, load_corpus_with, read_trial_csv, write_manifest, write_trial_csv, Corpus,
    CorpusManifest, LoadOptions, SurfaceEntry, TrialEntry, MANIFEST_FILE, SCHEMA_VERSION,
};
pub use ratings::{
    min_max_normalize, normalize_ratings, read_ratings, write_ratings, RatingMatrix, RatingsFile, RawRatings,
    RATING_MAX, RATING_MIN,
};

/// The ten material categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialClass {
    Metal,
    Wood,
    Fabric,
    Paper,
    Rubber,
    Plastic,
    Sandpaper,
    Leather,
    Foam,
    Vinyl,
}

impl MaterialClass {
    pub const ALL: [MaterialClass; 10] = [
        MaterialClass::Metal,
        MaterialClass::Wood,
        MaterialClass::Fabric,
        MaterialClass::Paper,
        MaterialClass::Rubber,
        MaterialClass::Plastic,
        MaterialClass::Sandpaper,
        MaterialClass::Leather,
        MaterialClass::Foam,
        MaterialClass::Vinyl,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            MaterialClass::Metal => "metal",
            MaterialClass::Wood => "wood",
            MaterialClass::Fabric => "fabric",
            MaterialClass::Paper => "paper",
            MaterialClass::Rubber => "rubber",
            MaterialClass::Plastic => "plastic",
            MaterialClass::Sandpaper => "sandpaper",
            MaterialClass::Leather => "leather",
            MaterialClass::Foam => "foam",
            MaterialClass::Vinyl => "vinyl",
        }
    }
}

impl fmt::Display for MaterialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MaterialClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown material class '{s}'")))
    }
}

/// Exploratory procedure performed during a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    Pressing,
    StaticContact,
    Sliding,
}

impl Procedure {
    pub const ALL: [Procedure; 3] = [
        Procedure::Pressing,
        Procedure::StaticContact,
        Procedure::Sliding,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Procedure::Pressing => "pressing",
            Procedure::StaticContact => "static_contact",
            Procedure::Sliding => "sliding",
        }
    }

    /// Channels that must be present for this procedure.
    pub fn required_channels(self) -> &'static [Channel] {
        match self {
            Procedure::Pressing => &[Channel::NormalForce, Channel::Indentation],
            Procedure::StaticContact => &[Channel::HeatFlux, Channel::SkinTemp],
            Procedure::Sliding => &[
                Channel::NormalForce,
                Channel::LateralForce,
                Channel::AccelX,
                Channel::AccelY,
                Channel::AccelZ,
            ],
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Named signal channel. The string names are the CSV header names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "normal_force_N")]
    NormalForce,
    #[serde(rename = "lateral_force_N")]
    LateralForce,
    #[serde(rename = "accel_x_ms2")]
    AccelX,
    #[serde(rename = "accel_y_ms2")]
    AccelY,
    #[serde(rename = "accel_z_ms2")]
    AccelZ,
    #[serde(rename = "heat_flux_Wm2")]
    HeatFlux,
    #[serde(rename = "skin_temp_C")]
    SkinTemp,
    #[serde(rename = "indentation_mm")]
    Indentation,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::NormalForce,
        Channel::LateralForce,
        Channel::AccelX,
        Channel::AccelY,
        Channel::AccelZ,
        Channel::HeatFlux,
        Channel::SkinTemp,
        Channel::Indentation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::NormalForce => "normal_force_N",
            Channel::LateralForce => "lateral_force_N",
            Channel::AccelX => "accel_x_ms2",
            Channel::AccelY => "accel_y_ms2",
            Channel::AccelZ => "accel_z_ms2",
            Channel::HeatFlux => "heat_flux_Wm2",
            Channel::SkinTemp => "skin_temp_C",
            Channel::Indentation => "indentation_mm",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == s)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bipolar adjective scale used in the rating experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjectivePair {
    RoughSmooth,
    StickySlippery,
    HotCold,
    HardSoft,
    WetDry,
}

impl AdjectivePair {
    pub const ALL: [AdjectivePair; 5] = [
        AdjectivePair::RoughSmooth,
        AdjectivePair::StickySlippery,
        AdjectivePair::HotCold,
        AdjectivePair::HardSoft,
        AdjectivePair::WetDry,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AdjectivePair::RoughSmooth => "rough_smooth",
            AdjectivePair::StickySlippery => "sticky_slippery",
            AdjectivePair::HotCold => "hot_cold",
            AdjectivePair::HardSoft => "hard_soft",
            AdjectivePair::WetDry => "wet_dry",
        }
    }
}

impl fmt::Display for AdjectivePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One trial's multichannel time series with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub trial_id: String,
    pub participant_id: String,
    pub surface_id: u32,
    pub material_class: MaterialClass,
    pub procedure: Procedure,
    pub sample_rate_hz: f64,
    pub timestamps: Vec<f64>,
    pub channels: BTreeMap<Channel, Vec<f64>>,
}

impl Recording {
    /// Check the structural invariants: required channels present, equal
    /// lengths, positive rate, monotone timestamps.
    pub fn validate(&self) -> Result<()> {
        let chan_err = |channel: &str, message: String| Error::Channel {
            trial_id: self.trial_id.clone(),
            channel: channel.to_string(),
            message,
        };
        if !(self.sample_rate_hz > 0.0) || !self.sample_rate_hz.is_finite() {
            return Err(Error::Schema {
                context: format!("trial {}", self.trial_id),
                message: format!("sample_rate_hz must be positive, got {}", self.sample_rate_hz),
            });
        }
        if !(1..=50).contains(&self.surface_id) {
            return Err(Error::Schema {
                context: format!("trial {}", self.trial_id),
                message: format!("surface_id {} outside 1..50", self.surface_id),
            });
        }
        if self.timestamps.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(chan_err("timestamp_s", "is not monotone nondecreasing".into()));
        }
        for &ch in self.procedure.required_channels() {
            if !self.channels.contains_key(&ch) {
                return Err(chan_err(
                    ch.name(),
                    format!("is required for procedure {}", self.procedure),
                ));
            }
        }
        let n = self.timestamps.len();
        for (ch, values) in &self.channels {
            if values.len() != n {
                return Err(chan_err(
                    ch.name(),
                    format!("has {} samples but timestamps has {}", values.len(), n),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn channel(&self, ch: Channel) -> Result<&[f64]> {
        self.channels
            .get(&ch)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Channel {
                trial_id: self.trial_id.clone(),
                channel: ch.name().to_string(),
                message: "is missing".into(),
            })
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }
}
