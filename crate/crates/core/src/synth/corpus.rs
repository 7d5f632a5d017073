use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    gen_pressing, gen_sliding, gen_thermal, NoiseSpec, PressingParams, SlidingParams,
    SurfaceSpec, ThermalParams, Vibration,
};
use crate::dataio::{
    write_manifest, write_ratings, write_trial_csv, AdjectivePair, CorpusManifest, MaterialClass,
    Procedure, RawRatings, SurfaceEntry, TrialEntry, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::rng::{child_rng, derive_seed, Rng};

pub const TRUTH_FILE: &str = "truth.csv";
pub const RATINGS_FILE: &str = "ratings.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusOptions {
    pub participants: usize,
    pub trials: usize,
    pub pressing_fs: f64,
    pub thermal_fs: f64,
    pub thermal_duration_s: f64,
    pub sliding_fs: f64,
    pub sliding_duration_s: f64,
    /// Multiplies every template noise level; 0 gives noiseless signals.
    pub noise_scale: f64,
    /// Relative lognormal jitter applied per surface to positive parameters.
    pub jitter: f64,
    /// Number of synthetic rating participants; 0 disables ratings.
    pub rating_participants: usize,
    pub rating_noise: f64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self {
            participants: 2,
            trials: 1,
            pressing_fs: 1000.0,
            thermal_fs: 100.0,
            thermal_duration_s: 36.0,
            sliding_fs: 5000.0,
            sliding_duration_s: 1.0,
            noise_scale: 1.0,
            jitter: 0.1,
            rating_participants: 20,
            rating_noise: 0.08,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub root: PathBuf,
    pub manifest: CorpusManifest,
    /// Generating spec per surface id.
    pub surfaces: BTreeMap<u32, SurfaceSpec>,
    pub ratings: Option<Vec<RawRatings>>,
}

fn template(
    material: MaterialClass,
    press: (f64, f64),
    lift: (f64, f64, f64),
    flux: (f64, f64, f64),
    temp_d: f64,
    temp_bc: (f64, f64),
    friction: f64,
    vibrations: &[(f64, f64)],
) -> SurfaceSpec {
    let (flux_a, flux_b, flux_c) = flux;
    SurfaceSpec {
        material,
        pressing: PressingParams {
            press_a: press.0,
            press_b: press.1,
            lift_a: lift.0,
            lift_b: lift.1,
            lift_c: lift.2,
            depth_offset_mm: 5.0,
        },
        thermal: ThermalParams {
            flux_a,
            flux_b,
            flux_c,
            flux_min_s: flux_c + 4.0 / flux_b,
            power_a: 0.08 * flux_a.abs(),
            power_b: 0.5,
            temp_a: 32.0,
            temp_b: temp_bc.0,
            temp_c: temp_bc.1,
            temp_d,
            temp_drift: 0.002,
        },
        sliding: SlidingParams {
            friction,
            normal_force_n: 1.0,
            vibrations: vibrations
                .iter()
                .map(|&(f, a)| Vibration {
                    freq_hz: f,
                    amplitude_n: a,
                })
                .collect(),
            accel_gain: [2.0, 1.0, 0.5],
        },
        noise: NoiseSpec {
            force_n: 0.002,
            depth_mm: 0.001,
            flux: 1.0,
            temp_c: 0.005,
            accel: 0.002,
        },
    }
}

/// One phenomenological profile per material class, in [`MaterialClass::ALL`] order.
pub fn class_templates() -> Vec<SurfaceSpec> {
    use MaterialClass::*;
    vec![
        template(Metal, (0.25, 1.6), (0.22, 1.8, 0.03), (-420.0, 2.2, 1.6), 26.5, (2.5, 1.2), 0.25, &[(600.0, 0.010)]),
        template(Wood, (0.5, 1.2), (0.42, 1.5, 0.06), (-240.0, 1.6, 2.0), 29.5, (2.2, 1.8), 0.40, &[(150.0, 0.030), (420.0, 0.010)]),
        template(Fabric, (2.0, 0.8), (1.6, 1.1, 0.35), (-80.0, 1.0, 3.0), 31.2, (1.8, 3.0), 0.60, &[(60.0, 0.020)]),
        template(Paper, (0.8, 1.0), (0.7, 1.3, 0.10), (-150.0, 1.3, 2.4), 30.4, (2.0, 2.2), 0.45, &[(200.0, 0.025)]),
        template(Rubber, (1.5, 0.9), (1.2, 1.2, 0.25), (-200.0, 1.4, 2.2), 29.8, (2.4, 2.0), 1.00, &[(80.0, 0.060)]),
        template(Plastic, (0.4, 1.4), (0.35, 1.6, 0.05), (-220.0, 1.8, 1.9), 29.2, (2.6, 1.6), 0.35, &[(350.0, 0.015)]),
        template(Sandpaper, (0.35, 1.5), (0.3, 1.7, 0.04), (-270.0, 1.9, 1.8), 28.8, (2.3, 1.5), 0.80, &[(120.0, 0.080), (450.0, 0.060), (900.0, 0.040)]),
        template(Leather, (1.2, 1.0), (1.0, 1.2, 0.18), (-170.0, 1.2, 2.6), 30.1, (2.1, 2.5), 0.55, &[(100.0, 0.030)]),
        template(Foam, (3.0, 0.6), (2.4, 0.8, 0.5), (-60.0, 0.9, 3.4), 31.5, (1.6, 3.4), 0.70, &[(40.0, 0.015)]),
        template(Vinyl, (0.6, 1.1), (0.5, 1.4, 0.08), (-230.0, 1.5, 2.1), 29.0, (2.8, 1.7), 0.50, &[(250.0, 0.030)]),
    ]
}

/// Multiply positive parameters by `exp(jitter·Z)`; negative ones keep their
/// sign and have their magnitude jittered. Vibration frequencies stay integer.
pub fn jitter_spec(spec: &SurfaceSpec, jitter: f64, rng: &mut Rng) -> SurfaceSpec {
    let mut j = |v: f64| -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        v * (jitter * z).exp()
    };
    let mut s = spec.clone();
    let p = &mut s.pressing;
    p.press_a = j(p.press_a);
    p.press_b = j(p.press_b);
    p.lift_a = j(p.lift_a);
    p.lift_b = j(p.lift_b);
    p.lift_c = j(p.lift_c);
    let t = &mut s.thermal;
    t.flux_a = j(t.flux_a);
    t.flux_b = j(t.flux_b);
    t.flux_c = j(t.flux_c);
    t.flux_min_s = t.flux_c + 4.0 / t.flux_b;
    t.power_a = j(t.power_a);
    t.power_b = j(t.power_b).min(0.95);
    t.temp_b = j(t.temp_b);
    t.temp_c = j(t.temp_c);
    // Jitter the drop depth rather than the absolute asymptote.
    t.temp_d = t.temp_a - j(t.temp_a - t.temp_d);
    t.temp_drift = j(t.temp_drift);
    let sl = &mut s.sliding;
    sl.friction = j(sl.friction);
    for v in &mut sl.vibrations {
        v.freq_hz = j(v.freq_hz).round().max(25.0);
        v.amplitude_n = j(v.amplitude_n);
    }
    s
}

fn squash(value: f64, center: f64, scale: f64) -> f64 {
    1.0 / (1.0 + (-(value.ln() - center.ln()) / scale).exp())
}

pub(crate) fn vibration_rms(s: &SlidingParams) -> f64 {
    (s.vibrations.iter().map(|v| v.amplitude_n.powi(2)).sum::<f64>() / 2.0).sqrt()
}

/// Latent sensation in [0, 1] for each adjective pair; the high end of each
/// scale is the second adjective (smooth, slippery, cold, soft, dry).
fn latent_sensations(spec: &SurfaceSpec) -> [f64; 5] {
    [
        1.0 - squash(vibration_rms(&spec.sliding), 0.03, 0.6),
        1.0 - squash(spec.sliding.friction, 0.5, 0.35),
        squash(spec.thermal.temp_a - spec.thermal.temp_d, 2.5, 0.5),
        squash(spec.pressing.press_a, 0.8, 0.6),
        1.0 - squash(spec.thermal.flux_a.abs(), 200.0, 0.6),
    ]
}

/// Synthetic 15-point ratings: latent sensation plus a per-participant bias
/// and per-cell Gaussian noise, rounded to the integer scale.
pub fn gen_ratings(
    surfaces: &BTreeMap<u32, SurfaceSpec>,
    participants: usize,
    noise: f64,
    seed: u64,
) -> Vec<RawRatings> {
    let cell = Normal::new(0.0, noise.max(0.0)).expect("finite noise");
    (0..participants)
        .map(|p| {
            let mut rng = child_rng(seed, 10_000 + p as u64);
            let bias: [f64; 5] = std::array::from_fn(|_| rng.random_range(-0.1..0.1));
            let mut ratings = BTreeMap::new();
            for (&sid, spec) in surfaces {
                let latent = latent_sensations(spec);
                for pair in AdjectivePair::ALL {
                    let v = (latent[pair.index()] + bias[pair.index()] + cell.sample(&mut rng))
                        .clamp(0.0, 1.0);
                    ratings.insert((sid, pair), (1.0 + 14.0 * v).round());
                }
            }
            RawRatings {
                participant_id: format!("R{:02}", p + 1),
                ratings,
            }
        })
        .collect()
}

fn scaled_noise(n: &NoiseSpec, k: f64) -> NoiseSpec {
    NoiseSpec {
        force_n: n.force_n * k,
        depth_mm: n.depth_mm * k,
        flux: n.flux * k,
        temp_c: n.temp_c * k,
        accel: n.accel * k,
    }
}

/// Generate a corpus in the on-disk layout under `root`: `manifest.json`,
/// `trials/*.csv`, `truth.csv`, and (when enabled) `ratings.json`.
///
/// Surface `s` belongs to class `(s - 1) / (n_surfaces / 10)`.
pub fn gen_corpus(
    root: impl AsRef<Path>,
    templates: &[SurfaceSpec],
    n_surfaces: usize,
    opts: &CorpusOptions,
    seed: u64,
) -> Result<GeneratedCorpus> {
    if templates.len() != MaterialClass::ALL.len() {
        return Err(Error::invalid(format!(
            "expected {} class templates, got {}",
            MaterialClass::ALL.len(),
            templates.len()
        )));
    }
    if n_surfaces == 0 || n_surfaces % templates.len() != 0 || n_surfaces > 50 {
        return Err(Error::invalid(format!(
            "n_surfaces must be a multiple of {} up to 50",
            templates.len()
        )));
    }
    let root = root.as_ref().to_path_buf();
    fs::create_dir_all(root.join("trials")).map_err(|e| Error::io(&root, e))?;
    let per_class = n_surfaces / templates.len();

    let mut surfaces = BTreeMap::new();
    let mut surface_entries = Vec::new();
    for s in 1..=n_surfaces as u32 {
        let class_idx = (s as usize - 1) / per_class;
        let mut rng = child_rng(seed, s as u64);
        let mut spec = jitter_spec(&templates[class_idx], opts.jitter, &mut rng);
        spec.material = MaterialClass::ALL[class_idx];
        spec.noise = scaled_noise(&spec.noise, opts.noise_scale);
        surface_entries.push(SurfaceEntry {
            surface_id: s,
            material_class: spec.material,
            description: format!("synthetic {} #{}", spec.material, (s as usize - 1) % per_class + 1),
        });
        surfaces.insert(s, spec);
    }

    struct Job {
        entry: TrialEntry,
        seed: u64,
    }
    let mut jobs = Vec::new();
    for p in 0..opts.participants {
        let pid = format!("P{:02}", p + 1);
        for &s in surfaces.keys() {
            for (pi, procedure) in Procedure::ALL.into_iter().enumerate() {
                for k in 0..opts.trials {
                    let trial_id = format!("{pid}_s{s:02}_{}_{k}", procedure.name());
                    let fs = match procedure {
                        Procedure::Pressing => opts.pressing_fs,
                        Procedure::StaticContact => opts.thermal_fs,
                        Procedure::Sliding => opts.sliding_fs,
                    };
                    let seed = derive_seed(
                        derive_seed(derive_seed(seed, 1_000 + s as u64), p as u64),
                        (pi * 1_000 + k) as u64,
                    );
                    jobs.push(Job {
                        entry: TrialEntry {
                            path: PathBuf::from("trials").join(format!("{trial_id}.csv")),
                            trial_id,
                            participant_id: pid.clone(),
                            surface_id: s,
                            procedure,
                            sample_rate_hz: fs,
                        },
                        seed,
                    });
                }
            }
        }
    }
    jobs.par_iter().try_for_each(|job| {
        let e = &job.entry;
        let spec = &surfaces[&e.surface_id];
        let mut rec = match e.procedure {
            Procedure::Pressing => gen_pressing(spec, e.sample_rate_hz, job.seed),
            Procedure::StaticContact => {
                gen_thermal(spec, e.sample_rate_hz, opts.thermal_duration_s, job.seed)
            }
            Procedure::Sliding => {
                gen_sliding(spec, e.sample_rate_hz, opts.sliding_duration_s, job.seed)
            }
        };
        rec.trial_id = e.trial_id.clone();
        rec.participant_id = e.participant_id.clone();
        rec.surface_id = e.surface_id;
        write_trial_csv(root.join(&e.path), &rec)
    })?;

    let manifest = CorpusManifest {
        schema_version: SCHEMA_VERSION.into(),
        surfaces: surface_entries,
        trials: jobs.into_iter().map(|j| j.entry).collect(),
    };
    write_manifest(&root, &manifest)?;
    write_truth(root.join(TRUTH_FILE), &surfaces, opts.thermal_fs)?;
    let ratings = if opts.rating_participants > 0 {
        let r = gen_ratings(&surfaces, opts.rating_participants, opts.rating_noise, derive_seed(seed, 77));
        write_ratings(root.join(RATINGS_FILE), &r)?;
        Some(r)
    } else {
        None
    };
    Ok(GeneratedCorpus {
        root,
        manifest,
        surfaces,
        ratings,
    })
}

fn write_truth(path: PathBuf, surfaces: &BTreeMap<u32, SurfaceSpec>, thermal_fs: f64) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&path)?;
    w.write_record([
        "surface_id", "material", "press_a", "press_b", "lift_a", "lift_b", "lift_c", "flux_a",
        "flux_b", "flux_c", "flux_min_s", "power_a", "power_b", "power_c", "temp_a", "temp_b",
        "temp_c", "temp_d", "temp_drift", "friction", "normal_force_n", "vibration_rms",
        "dominant_freq_hz",
    ])?;
    for (sid, s) in surfaces {
        let (p, t, sl) = (&s.pressing, &s.thermal, &s.sliding);
        let dominant = sl
            .vibrations
            .iter()
            .max_by(|a, b| a.amplitude_n.total_cmp(&b.amplitude_n))
            .map_or(0.0, |v| v.freq_hz);
        let row = [
            sid.to_string(),
            s.material.to_string(),
            p.press_a.to_string(),
            p.press_b.to_string(),
            p.lift_a.to_string(),
            p.lift_b.to_string(),
            p.lift_c.to_string(),
            t.flux_a.to_string(),
            t.flux_b.to_string(),
            t.flux_c.to_string(),
            t.flux_min_s.to_string(),
            t.power_a.to_string(),
            t.power_b.to_string(),
            t.power_c(thermal_fs).to_string(),
            t.temp_a.to_string(),
            t.temp_b.to_string(),
            t.temp_c.to_string(),
            t.temp_d.to_string(),
            t.temp_drift.to_string(),
            sl.friction.to_string(),
            sl.normal_force_n.to_string(),
            vibration_rms(sl).to_string(),
            dominant.to_string(),
        ];
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}
