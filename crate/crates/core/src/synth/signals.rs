use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand_distr::{Distribution, Normal};

use super::SurfaceSpec;
use crate::dataio::{Channel, Procedure, Recording};
use crate::rng::{child_rng, Rng};

/// Contact instant of generated static-contact trials, seconds.
pub const THERMAL_CONTACT_S: f64 = 2.0;

/// Phase timing of the generated pressing trapezoid, seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressingTimeline {
    pub pre: f64,
    pub ramp_up: f64,
    pub hold: f64,
    pub ramp_down: f64,
    pub post: f64,
    pub peak_force_n: f64,
}

impl Default for PressingTimeline {
    fn default() -> Self {
        Self {
            pre: 0.5,
            ramp_up: 1.0,
            hold: 2.0,
            ramp_down: 1.0,
            post: 0.5,
            peak_force_n: 3.0,
        }
    }
}

impl PressingTimeline {
    pub fn total(&self) -> f64 {
        self.pre + self.ramp_up + self.hold + self.ramp_down + self.post
    }

    /// Noise-free force at time `t`.
    pub fn force(&self, t: f64) -> f64 {
        let up = self.pre;
        let top = up + self.ramp_up;
        let release = top + self.hold;
        let down = release + self.ramp_down;
        if t <= up {
            0.0
        } else if t < top {
            self.peak_force_n * (t - up) / self.ramp_up
        } else if t <= release {
            self.peak_force_n
        } else if t < down {
            self.peak_force_n * (down - t) / self.ramp_down
        } else {
            0.0
        }
    }
}

fn blank(spec: &SurfaceSpec, procedure: Procedure, fs: f64, n: usize) -> Recording {
    Recording {
        trial_id: format!("synthetic-{}", procedure.name()),
        participant_id: "synthetic".into(),
        surface_id: 1,
        material_class: spec.material,
        procedure,
        sample_rate_hz: fs,
        timestamps: (0..n).map(|i| i as f64 / fs).collect(),
        channels: BTreeMap::new(),
    }
}

fn add_noise(x: &mut [f64], sd: f64, rng: &mut Rng) {
    if sd > 0.0 {
        let dist = Normal::new(0.0, sd).expect("finite sd");
        for v in x.iter_mut() {
            *v += dist.sample(rng);
        }
    }
}

/// Pressing trial: force trapezoid 0 → 3 N, 2 s hold, release; indentation
/// follows the press curve on the way up, creeps linearly to the lift curve
/// during the hold, and follows the lift curve on release.
pub fn gen_pressing(spec: &SurfaceSpec, fs: f64, seed: u64) -> Recording {
    let tl = PressingTimeline::default();
    let n = (tl.total() * fs).round() as usize + 1;
    let mut rec = blank(spec, Procedure::Pressing, fs, n);
    let p = &spec.pressing;
    let press = |f: f64| p.press_a * (1.0 - (-p.press_b * f).exp());
    let lift = |f: f64| p.lift_a * (1.0 - (-p.lift_b * f).exp()) + p.lift_c;
    let top = tl.pre + tl.ramp_up;
    let release = top + tl.hold;

    let mut force = Vec::with_capacity(n);
    let mut depth = Vec::with_capacity(n);
    for &t in &rec.timestamps {
        let f = tl.force(t);
        let d = if t <= tl.pre {
            0.0
        } else if t < top {
            press(f)
        } else if t <= release {
            let u = (t - top) / tl.hold;
            (1.0 - u) * press(tl.peak_force_n) + u * lift(tl.peak_force_n)
        } else if f > 0.0 {
            lift(f)
        } else {
            p.lift_c
        };
        force.push(f);
        depth.push(p.depth_offset_mm + d);
    }
    let mut rng = child_rng(seed, 0);
    add_noise(&mut force, spec.noise.force_n, &mut rng);
    add_noise(&mut depth, spec.noise.depth_mm, &mut rng);
    rec.channels.insert(Channel::NormalForce, force);
    rec.channels.insert(Channel::Indentation, depth);
    rec
}

/// Static-contact trial of `duration` seconds with contact at
/// [`THERMAL_CONTACT_S`].
pub fn gen_thermal(spec: &SurfaceSpec, fs: f64, duration: f64, seed: u64) -> Recording {
    let n = (duration * fs).round() as usize + 1;
    let mut rec = blank(spec, Procedure::StaticContact, fs, n);
    let th = &spec.thermal;
    let dt = 1.0 / fs;
    let contact = (THERMAL_CONTACT_S * fs).round() as usize;
    let min_idx = (th.flux_min_s * fs).round() as usize;
    let t_min = min_idx as f64 * dt;
    let power_c = th.power_c(fs);
    let rewarm = (th.rewarm_s() * fs).round() / fs;
    let four_pl = |x: f64| th.temp_d + (th.temp_a - th.temp_d) / (1.0 + (x / th.temp_c).powf(th.temp_b));

    let mut flux = Vec::with_capacity(n);
    let mut temp = Vec::with_capacity(n);
    for i in 0..n {
        if i <= contact {
            flux.push(th.flux_logistic(0.0));
            temp.push(th.temp_a);
            continue;
        }
        let k = i - contact;
        let x = k as f64 * dt;
        flux.push(if k <= min_idx {
            th.flux_logistic(x)
        } else {
            power_c + th.power_a * (x - t_min + dt).powf(th.power_b)
        });
        temp.push(if x <= rewarm {
            four_pl(x + dt)
        } else {
            four_pl(rewarm + dt) + th.temp_drift * (x - rewarm).powi(2)
        });
    }
    let mut rng = child_rng(seed, 1);
    add_noise(&mut flux, spec.noise.flux, &mut rng);
    add_noise(&mut temp, spec.noise.temp_c, &mut rng);
    rec.channels.insert(Channel::HeatFlux, flux);
    rec.channels.insert(Channel::SkinTemp, temp);
    rec
}

/// Sliding trial: constant normal force, lateral force = friction × normal +
/// vibration components, acceleration = per-axis gain × vibration.
pub fn gen_sliding(spec: &SurfaceSpec, fs: f64, duration: f64, seed: u64) -> Recording {
    let n = (duration * fs).round() as usize;
    let mut rec = blank(spec, Procedure::Sliding, fs, n);
    let s = &spec.sliding;
    let vib: Vec<f64> = rec
        .timestamps
        .iter()
        .map(|&t| {
            s.vibrations
                .iter()
                .map(|v| v.amplitude_n * (2.0 * PI * v.freq_hz * t).sin())
                .sum()
        })
        .collect();
    let mut normal = vec![s.normal_force_n; n];
    let mut lateral: Vec<f64> = vib.iter().map(|v| s.friction * s.normal_force_n + v).collect();
    let mut rng = child_rng(seed, 2);
    add_noise(&mut normal, spec.noise.force_n, &mut rng);
    add_noise(&mut lateral, spec.noise.force_n, &mut rng);
    rec.channels.insert(Channel::NormalForce, normal);
    rec.channels.insert(Channel::LateralForce, lateral);
    for (axis, ch) in [Channel::AccelX, Channel::AccelY, Channel::AccelZ].into_iter().enumerate() {
        let mut a: Vec<f64> = vib.iter().map(|v| s.accel_gain[axis] * v).collect();
        add_noise(&mut a, spec.noise.accel, &mut rng);
        rec.channels.insert(ch, a);
    }
    rec
}
