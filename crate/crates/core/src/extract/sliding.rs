use super::pressing::require_procedure;
use super::{ExtractConfig, Extracted, ACCEL_SOURCE, FORCE_DESCRIPTORS};
use crate::dataio::{Channel, Procedure, Recording};
use crate::dsp::{mfcc, power_spectrum, spectral_descriptors, time_descriptors, Butterworth, DescriptorSet};
use crate::error::{Error, Result};

/// Longest run of samples with normal force above `min_normal`, as `[start, end)`.
pub fn sliding_span(normal: &[f64], min_normal: f64) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for i in 0..=normal.len() {
        let inside = i < normal.len() && normal[i] > min_normal;
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| i - s > b - a) {
                    best = Some((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// Map a descriptor flag to the descriptor keys it qualifies.
fn flagged_keys(flag: &str) -> &'static [&'static str] {
    match flag {
        "skewness_undefined" => &["s5"],
        "kurtosis_undefined" => &["s6"],
        "shape_factor_undefined" => &["s7"],
        "impulse_factor_undefined" => &["s8"],
        "crest_factor_undefined" => &["s9"],
        "clearance_factor_undefined" => &["s10"],
        "harmonics_undefined" => &["s11", "s12"],
        "sinad_undefined" => &["s12"],
        "zero_spectrum" => &["s15", "s16", "s17", "s18", "s19", "s20"],
        f if f.starts_with("band_0_") => &["s21"],
        f if f.starts_with("band_100_") => &["s22"],
        f if f.starts_with("band_500_") => &["s23"],
        f if f.starts_with("band_1000_") => &["s24"],
        f if f.starts_with("band_2000_") => &["s25"],
        _ => &[],
    }
}

fn descriptors(x: &[f64], fs: f64) -> Result<DescriptorSet> {
    let mut d = time_descriptors(x);
    d.extend(spectral_descriptors(&power_spectrum(x, fs)?));
    Ok(d)
}

/// 77 sliding features: friction coefficient `s13` from the unfiltered
/// forces, 24 descriptors each of the band-passed lateral force and of the
/// band-passed acceleration magnitude, and 14 MFCCs of each.
pub fn extract_sliding(r: &Recording, cfg: &ExtractConfig) -> Result<Extracted> {
    require_procedure(r, Procedure::Sliding)?;
    let fs = r.sample_rate_hz;
    let normal = r.channel(Channel::NormalForce)?;
    let lateral = r.channel(Channel::LateralForce)?;
    let mut out = Extracted::default();

    let (lo, hi, friction) = match sliding_span(normal, cfg.sliding_min_normal_n) {
        Some((a, b)) => {
            let mu = (a..b).map(|i| lateral[i].abs() / normal[i]).sum::<f64>() / (b - a) as f64;
            (a, b, Some(mu))
        }
        None => (0, normal.len(), None),
    };
    if hi - lo < cfg.mfcc.frame_len {
        return Err(Error::Segmentation(format!(
            "sliding span of {} samples is shorter than one MFCC frame ({})",
            hi - lo,
            cfg.mfcc.frame_len
        )));
    }
    let filter = Butterworth::bandpass(4, fs, cfg.bandpass_low_hz, cfg.bandpass_high_hz)?;
    let lat = filter.filtfilt(&lateral[lo..hi]);
    let axes = [Channel::AccelX, Channel::AccelY, Channel::AccelZ]
        .map(|c| r.channel(c).map(|x| filter.filtfilt(&x[lo..hi])));
    let [ax, ay, az] = axes;
    let (ax, ay, az) = (ax?, ay?, az?);
    let acc: Vec<f64> = (0..lat.len())
        .map(|i| (ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i]).sqrt())
        .collect();

    let df = descriptors(&lat, fs)?;
    for key in FORCE_DESCRIPTORS {
        if key == "s13" {
            match friction {
                Some(mu) => out.push("s13", mu),
                None => {
                    out.push("s13", 0.0);
                    out.flag(&["s13"], "friction_undefined");
                }
            }
        } else {
            out.push(key, df.get(key).expect("descriptor present"));
        }
    }
    for f in &df.flags {
        out.flag(flagged_keys(f), f);
    }
    let da = descriptors(&acc, fs)?;
    for (i, key) in ACCEL_SOURCE.iter().enumerate() {
        out.push(&format!("sAcc{}", i + 1), da.get(key).expect("descriptor present"));
    }
    for f in &da.flags {
        let names: Vec<String> = flagged_keys(f)
            .iter()
            .filter_map(|k| ACCEL_SOURCE.iter().position(|s| s == k))
            .map(|i| format!("sAcc{}", i + 1))
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        out.flag(&refs, f);
    }
    for (prefix, x) in [("mfccF", &lat), ("mfccA", &acc)] {
        for (i, c) in mfcc(x, fs, &cfg.mfcc)?.into_iter().enumerate() {
            out.push(&format!("{prefix}{}", i + 1), c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{class_templates, gen_sliding, Vibration};

    fn spec_with(vibrations: Vec<Vibration>, friction: f64) -> crate::synth::SurfaceSpec {
        let mut s = class_templates()[0].clone();
        s.noise = Default::default();
        s.sliding.vibrations = vibrations;
        s.sliding.friction = friction;
        s
    }

    #[test]
    fn constant_forces_give_ratio() {
        let mut r = gen_sliding(&spec_with(vec![], 0.5), 5000.0, 1.0, 0);
        r.channels.get_mut(&Channel::NormalForce).unwrap().fill(2.0);
        r.channels.get_mut(&Channel::LateralForce).unwrap().fill(1.0);
        let e = extract_sliding(&r, &ExtractConfig::default()).unwrap();
        assert_eq!(e.get("s13"), Some(0.5));
        assert_eq!(e.values.len(), 77);
        assert!(e.values.iter().all(|(_, v)| v.is_finite()));
    }

    #[test]
    fn friction_recovered() {
        let vib = vec![Vibration { freq_hz: 250.0, amplitude_n: 0.05 }];
        let r = gen_sliding(&spec_with(vib, 0.5), 5000.0, 1.0, 0);
        let e = extract_sliding(&r, &ExtractConfig::default()).unwrap();
        assert!((e.get("s13").unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn spectral_peak_at_vibration() {
        let vib = vec![Vibration { freq_hz: 250.0, amplitude_n: 0.05 }];
        let r = gen_sliding(&spec_with(vib, 0.4), 5000.0, 1.0, 0);
        let e = extract_sliding(&r, &ExtractConfig::default()).unwrap();
        let bin = 5000.0 / 4096.0;
        assert!((e.get("s20").unwrap() - 250.0).abs() <= bin);
        let bands: Vec<f64> = ["s21", "s22", "s23", "s24", "s25"].iter().map(|k| e.get(k).unwrap()).collect();
        let total: f64 = bands.iter().sum();
        assert!(bands[1] / total > 0.99, "{bands:?}");
    }

    #[test]
    fn zero_vibration_has_no_band_energy() {
        let r = gen_sliding(&spec_with(vec![], 0.4), 5000.0, 1.0, 0);
        let e = extract_sliding(&r, &ExtractConfig::default()).unwrap();
        for k in ["s21", "s22", "s23", "s24", "s25"] {
            assert!(e.get(k).unwrap() < 1e-12, "{k}");
        }
        assert!(e.values.iter().all(|(_, v)| v.is_finite()));
    }

    #[test]
    fn deterministic() {
        let spec = class_templates()[6].clone();
        let r = gen_sliding(&spec, 5000.0, 1.0, 42);
        let a = extract_sliding(&r, &ExtractConfig::default()).unwrap();
        let b = extract_sliding(&r.clone(), &ExtractConfig::default()).unwrap();
        let bits = |e: &Extracted| e.values.iter().map(|(_, v)| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn span_is_longest_loaded_run() {
        let n = [0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert_eq!(sliding_span(&n, 0.05), Some((4, 7)));
        assert_eq!(sliding_span(&[0.0; 4], 0.05), None);
        assert_eq!(sliding_span(&[1.0; 4], 0.05), Some((0, 4)));
    }

    #[test]
    fn unloaded_slide_flags_friction() {
        let mut r = gen_sliding(&spec_with(vec![], 0.4), 5000.0, 1.0, 0);
        r.channels.get_mut(&Channel::NormalForce).unwrap().fill(0.0);
        let e = extract_sliding(&r, &ExtractConfig::default()).unwrap();
        assert_eq!(e.get("s13"), Some(0.0));
        assert!(e.flags["s13"].contains(&"friction_undefined".to_string()));
    }

    #[test]
    fn low_rate_rejected() {
        let r = gen_sliding(&spec_with(vec![], 0.4), 1500.0, 2.0, 0);
        assert!(extract_sliding(&r, &ExtractConfig::default()).is_err());
    }
}
