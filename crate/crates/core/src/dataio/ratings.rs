use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AdjectivePair;
use crate::error::{Error, Result};

pub const RATING_MIN: f64 = 1.0;
pub const RATING_MAX: f64 = 15.0;

/// One participant's raw ratings on the 15-point scale.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawRatings {
    pub participant_id: String,
    pub ratings: BTreeMap<(u32, AdjectivePair), f64>,
}

/// Normalized ratings, rows ordered by `surfaces`, columns by [`AdjectivePair::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingMatrix {
    pub surfaces: Vec<u32>,
    pub per_participant: BTreeMap<String, Vec<[f64; 5]>>,
    pub averaged: Vec<[f64; 5]>,
    /// (participant, pair) columns that were constant and mapped to 0.5.
    pub constant_columns: Vec<(String, AdjectivePair)>,
}

impl RatingMatrix {
    pub fn row_of(&self, surface_id: u32) -> Option<usize> {
        self.surfaces.iter().position(|&s| s == surface_id)
    }

    pub fn averaged_for(&self, surface_id: u32) -> Option<[f64; 5]> {
        self.row_of(surface_id).map(|r| self.averaged[r])
    }

    /// One participant's 50-vector for a single adjective pair.
    pub fn participant_column(&self, participant: &str, pair: AdjectivePair) -> Option<Vec<f64>> {
        self.per_participant
            .get(participant)
            .map(|m| m.iter().map(|row| row[pair.index()]).collect())
    }
}

/// Min-max normalize to [0, 1]. A constant column maps to 0.5 and returns `true`.
pub fn min_max_normalize(values: &[f64]) -> (Vec<f64>, bool) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || hi <= lo {
        return (vec![0.5; values.len()], true);
    }
    let span = hi - lo;
    (values.iter().map(|v| (v - lo) / span).collect(), false)
}

/// Per-participant min-max normalization of each adjective pair across the
/// rated surfaces, then an elementwise mean over participants.
pub fn normalize_ratings(raw: &[RawRatings]) -> Result<RatingMatrix> {
    if raw.is_empty() {
        return Err(Error::Ratings("at least one participant is required".into()));
    }
    let mut by_id: BTreeMap<&str, &RawRatings> = BTreeMap::new();
    for r in raw {
        if by_id.insert(r.participant_id.as_str(), r).is_some() {
            return Err(Error::Ratings(format!(
                "duplicate participant '{}'",
                r.participant_id
            )));
        }
    }
    let surfaces: Vec<u32> = by_id
        .values()
        .next()
        .map(|r| {
            r.ratings
                .keys()
                .map(|(s, _)| *s)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .unwrap_or_default();
    if surfaces.is_empty() {
        return Err(Error::Ratings("no rated surfaces".into()));
    }

    let mut per_participant = BTreeMap::new();
    let mut constant_columns = Vec::new();
    for (&pid, r) in &by_id {
        let expected = surfaces.len() * AdjectivePair::ALL.len();
        if r.ratings.len() != expected {
            return Err(Error::Ratings(format!(
                "participant '{pid}' has {} cells, expected {expected}",
                r.ratings.len()
            )));
        }
        let mut rows = vec![[0.0; 5]; surfaces.len()];
        for pair in AdjectivePair::ALL {
            let mut col = Vec::with_capacity(surfaces.len());
            for &s in &surfaces {
                let v = *r.ratings.get(&(s, pair)).ok_or_else(|| {
                    Error::Ratings(format!("participant '{pid}' missing surface {s} / {pair}"))
                })?;
                if !v.is_finite() || !(RATING_MIN..=RATING_MAX).contains(&v) {
                    return Err(Error::Ratings(format!(
                        "participant '{pid}' surface {s} {pair}: {v} outside [{RATING_MIN}, {RATING_MAX}]"
                    )));
                }
                col.push(v);
            }
            let (norm, constant) = min_max_normalize(&col);
            if constant {
                log::warn!("participant '{pid}' rated {pair} constant; mapped to 0.5");
                constant_columns.push((pid.to_string(), pair));
            }
            for (row, v) in rows.iter_mut().zip(norm) {
                row[pair.index()] = v;
            }
        }
        per_participant.insert(pid.to_string(), rows);
    }

    let m = per_participant.len() as f64;
    let mut averaged = vec![[0.0; 5]; surfaces.len()];
    for rows in per_participant.values() {
        for (acc, row) in averaged.iter_mut().zip(rows) {
            for j in 0..5 {
                acc[j] += row[j];
            }
        }
    }
    for row in &mut averaged {
        for v in row.iter_mut() {
            *v /= m;
        }
    }
    Ok(RatingMatrix {
        surfaces,
        per_participant,
        averaged,
        constant_columns,
    })
}

/// On-disk ratings: `participants[participant_id][surface_id][pair] = value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingsFile {
    pub schema_version: String,
    pub participants: BTreeMap<String, BTreeMap<String, BTreeMap<AdjectivePair, f64>>>,
}

impl RatingsFile {
    pub fn from_raw(raw: &[RawRatings]) -> Self {
        let mut participants = BTreeMap::new();
        for r in raw {
            let mut surfaces: BTreeMap<String, BTreeMap<AdjectivePair, f64>> = BTreeMap::new();
            for (&(s, pair), &v) in &r.ratings {
                surfaces.entry(s.to_string()).or_default().insert(pair, v);
            }
            participants.insert(r.participant_id.clone(), surfaces);
        }
        Self {
            schema_version: super::SCHEMA_VERSION.into(),
            participants,
        }
    }

    pub fn to_raw(&self) -> Result<Vec<RawRatings>> {
        let mut out = Vec::new();
        for (pid, surfaces) in &self.participants {
            let mut ratings = BTreeMap::new();
            for (sid, pairs) in surfaces {
                let s: u32 = sid.parse().map_err(|_| {
                    Error::Ratings(format!("participant '{pid}': bad surface id '{sid}'"))
                })?;
                for (&pair, &v) in pairs {
                    ratings.insert((s, pair), v);
                }
            }
            out.push(RawRatings {
                participant_id: pid.clone(),
                ratings,
            });
        }
        Ok(out)
    }
}

pub fn read_ratings(path: impl AsRef<Path>) -> Result<Vec<RawRatings>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: RatingsFile = serde_json::from_str(&text).map_err(|e| Error::Schema {
        context: path.display().to_string(),
        message: e.to_string(),
    })?;
    if file.schema_version != super::SCHEMA_VERSION {
        return Err(Error::Schema {
            context: path.display().to_string(),
            message: format!("unsupported schema_version '{}'", file.schema_version),
        });
    }
    file.to_raw()
}

pub fn write_ratings(path: impl AsRef<Path>, raw: &[RawRatings]) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(&RatingsFile::from_raw(raw))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn participant(id: &str, surfaces: &[u32], mut f: impl FnMut(u32, AdjectivePair) -> f64) -> RawRatings {
        let mut ratings = BTreeMap::new();
        for &s in surfaces {
            for p in AdjectivePair::ALL {
                ratings.insert((s, p), f(s, p));
            }
        }
        RawRatings {
            participant_id: id.into(),
            ratings,
        }
    }

    #[test]
    fn three_surface_affine_normalization() {
        let vals = [1.0, 8.0, 15.0];
        let raw = participant("p", &[1, 2, 3], |s, _| vals[(s - 1) as usize]);
        let m = normalize_ratings(&[raw]).unwrap();
        let col: Vec<f64> = m.averaged.iter().map(|r| r[0]).collect();
        assert_eq!(col, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn identical_participants_average_to_either() {
        let f = |s: u32, p: AdjectivePair| 1.0 + ((s * 7 + p.index() as u32 * 3) % 15) as f64;
        let surfaces: Vec<u32> = (1..=50).collect();
        let a = participant("a", &surfaces, f);
        let b = participant("b", &surfaces, f);
        let m = normalize_ratings(&[a, b]).unwrap();
        assert_eq!(m.averaged, m.per_participant["a"]);
    }

    #[test]
    fn constant_column_maps_to_half() {
        let surfaces: Vec<u32> = (1..=4).collect();
        let raw = participant("p", &surfaces, |s, p| {
            if p == AdjectivePair::HotCold {
                7.0
            } else {
                s as f64
            }
        });
        let m = normalize_ratings(&[raw]).unwrap();
        assert!(m.averaged.iter().all(|r| r[AdjectivePair::HotCold.index()] == 0.5));
        assert_eq!(m.constant_columns, vec![("p".to_string(), AdjectivePair::HotCold)]);
    }

    #[test]
    fn out_of_range_is_error_not_clamp() {
        let raw = participant("p", &[1, 2], |s, _| if s == 1 { 0.0 } else { 5.0 });
        assert!(normalize_ratings(&[raw]).is_err());
    }

    #[test]
    fn missing_cell_is_error() {
        let mut raw = participant("p", &[1, 2, 3], |s, _| s as f64);
        raw.ratings.remove(&(2, AdjectivePair::WetDry));
        assert!(normalize_ratings(&[raw]).is_err());
    }

    #[test]
    fn twenty_participants_match_spreadsheet_oracle() {
        let mut rng = crate::rng::rng_from(11);
        let surfaces: Vec<u32> = (1..=50).collect();
        let raws: Vec<RawRatings> = (0..20)
            .map(|p| {
                let mut ratings = BTreeMap::new();
                for &s in &surfaces {
                    for pair in AdjectivePair::ALL {
                        ratings.insert((s, pair), rng.random_range(1.0..=15.0));
                    }
                }
                RawRatings {
                    participant_id: format!("p{p:02}"),
                    ratings,
                }
            })
            .collect();
        let m = normalize_ratings(&raws).unwrap();
        // Oracle: explicit cell-by-cell min/max lookup and mean.
        for (si, &s) in surfaces.iter().enumerate() {
            for pair in AdjectivePair::ALL {
                let mut sum = 0.0;
                for r in &raws {
                    let mut lo = f64::MAX;
                    let mut hi = f64::MIN;
                    for &t in &surfaces {
                        let v = r.ratings[&(t, pair)];
                        if v < lo {
                            lo = v;
                        }
                        if v > hi {
                            hi = v;
                        }
                    }
                    sum += (r.ratings[&(s, pair)] - lo) / (hi - lo);
                }
                let expect = sum / raws.len() as f64;
                let got = m.averaged[si][pair.index()];
                assert!((0.0..=1.0).contains(&got));
                assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
            }
        }
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(v in proptest::collection::vec(1.0f64..15.0, 2..60)) {
            let (once, _) = min_max_normalize(&v);
            let (twice, _) = min_max_normalize(&once);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn average_ignores_participant_order(seed in 0u64..1000) {
            let mut rng = crate::rng::rng_from(seed);
            let surfaces: Vec<u32> = (1..=6).collect();
            let mut raws: Vec<RawRatings> = (0..4)
                .map(|p| participant(&format!("p{p}"), &surfaces, |_, _| rng.random_range(1.0..=15.0)))
                .collect();
            let a = normalize_ratings(&raws).unwrap();
            raws.reverse();
            let b = normalize_ratings(&raws).unwrap();
            prop_assert_eq!(a.averaged, b.averaged);
        }
    }
}
