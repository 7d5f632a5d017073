use serde::Serialize;

use super::{mean, power_spectrum};

/// Ordered named descriptor values plus any flags raised while computing them.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DescriptorSet {
    pub values: Vec<(&'static str, f64)>,
    pub flags: Vec<String>,
}

impl DescriptorSet {
    pub fn push(&mut self, key: &'static str, value: f64) {
        self.values.push((key, value));
    }

    pub fn flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub fn extend(&mut self, other: DescriptorSet) {
        self.values.extend(other.values);
        for f in other.flags {
            self.flag(&f);
        }
    }
}

const HARMONICS: std::ops::RangeInclusive<usize> = 2..=6;
/// Half-width, in bins, of the window summed around a spectral line.
const LINE_HALF_WIDTH: usize = 2;

/// Time-domain descriptors s1..s12 and s14.
///
/// | key | descriptor |
/// |-----|------------|
/// | s1 | mean |
/// | s2 | population standard deviation |
/// | s3 | RMS |
/// | s4 | max \|x\| |
/// | s5 | skewness |
/// | s6 | kurtosis (non-excess, Gaussian = 3) |
/// | s7 | shape factor RMS / mean\|x\| |
/// | s8 | impulse factor max\|x\| / mean\|x\| |
/// | s9 | crest factor max\|x\| / RMS |
/// | s10 | clearance factor max\|x\| / mean(√\|x\|)² |
/// | s11 | THD: power of harmonics 2..6 over the fundamental |
/// | s12 | SINAD: fundamental power over everything else except DC |
/// | s14 | average power mean(x²) |
///
/// Ratio descriptors with a zero denominator are reported as 0 and flagged.
pub fn time_descriptors(x: &[f64]) -> DescriptorSet {
    let mut out = DescriptorSet::default();
    let n = x.len() as f64;
    let m = mean(x);
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    let std = m2.sqrt();
    let power = x.iter().map(|v| v * v).sum::<f64>() / n;
    let rms = power.sqrt();
    let peak = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mean_abs = x.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean_sqrt = x.iter().map(|v| v.abs().sqrt()).sum::<f64>() / n;

    let mut ratio = |num: f64, den: f64, name: &str| {
        if den > 0.0 && den.is_finite() {
            num / den
        } else {
            out.flag(&format!("{name}_undefined"));
            0.0
        }
    };
    let skew = ratio(m3, m2.powf(1.5), "skewness");
    let kurt = ratio(m4, m2 * m2, "kurtosis");
    let shape = ratio(rms, mean_abs, "shape_factor");
    let impulse = ratio(peak, mean_abs, "impulse_factor");
    let crest = ratio(peak, rms, "crest_factor");
    let clearance = ratio(peak, mean_sqrt * mean_sqrt, "clearance_factor");

    let (thd, sinad) = harmonic_ratios(x, &mut out);

    out.push("s1", m);
    out.push("s2", std);
    out.push("s3", rms);
    out.push("s4", peak);
    out.push("s5", skew);
    out.push("s6", kurt);
    out.push("s7", shape);
    out.push("s8", impulse);
    out.push("s9", crest);
    out.push("s10", clearance);
    out.push("s11", thd);
    out.push("s12", sinad);
    out.push("s14", power);
    out
}

/// THD and SINAD from the averaged power spectrum (rate-free, in bins). The
/// fundamental is the strongest non-DC bin, refined to a power-weighted
/// centroid so harmonic positions do not drift.
fn harmonic_ratios(x: &[f64], out: &mut DescriptorSet) -> (f64, f64) {
    let Ok(spec) = power_spectrum(x, 1.0) else {
        out.flag("harmonics_undefined");
        return (0.0, 0.0);
    };
    let p = &spec.power;
    let last = p.len() - 1;
    let line = |center: usize| -> f64 {
        let lo = center.saturating_sub(LINE_HALF_WIDTH).max(1);
        let hi = (center + LINE_HALF_WIDTH).min(last);
        if lo > hi {
            0.0
        } else {
            p[lo..=hi].iter().sum()
        }
    };
    let k0 = (1..=last).fold(1, |best, k| if p[k] > p[best] { k } else { best });
    let fund = line(k0);
    if fund <= 0.0 {
        out.flag("harmonics_undefined");
        return (0.0, 0.0);
    }
    let lo = k0.saturating_sub(LINE_HALF_WIDTH).max(1);
    let hi = (k0 + LINE_HALF_WIDTH).min(last);
    let refined = (lo..=hi).map(|k| k as f64 * p[k]).sum::<f64>() / fund;

    let harm: f64 = HARMONICS
        .map(|h| (h as f64 * refined).round() as usize)
        .filter(|&k| k <= last)
        .map(line)
        .sum();
    let residual = p[1..].iter().sum::<f64>() - fund;
    let sinad = if residual > fund * 1e-15 {
        fund / residual
    } else {
        out.flag("sinad_undefined");
        0.0
    };
    (harm / fund, sinad)
}
