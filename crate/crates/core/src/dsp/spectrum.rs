use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::Serialize;

use super::DescriptorSet;
use crate::error::{Error, Result};

/// Band edges (Hz) for the s21..s25 band energies. The first band is closed
/// at 0, every other band is `(lo, hi]`.
pub const BANDS_HZ: [(f64, f64); 5] = [
    (0.0, 100.0),
    (100.0, 500.0),
    (500.0, 1000.0),
    (1000.0, 2000.0),
    (2000.0, 5000.0),
];

const ROLLOFF_FRACTION: f64 = 0.95;
const FLATNESS_FLOOR: f64 = 1e-20;
const BANDWIDTH_DB: f64 = -20.0;

/// One-sided averaged power spectrum. `power` is normalized so that its sum
/// equals the window-energy-normalized mean square of the segments, i.e. the
/// average signal power for stationary input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub source_rate_hz: f64,
}

impl Spectrum {
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn bin_width(&self) -> f64 {
        if self.freqs_hz.len() > 1 {
            self.freqs_hz[1] - self.freqs_hz[0]
        } else {
            self.source_rate_hz
        }
    }

    pub fn nyquist(&self) -> f64 {
        self.source_rate_hz / 2.0
    }
}

pub(crate) fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Welch periodogram: periodic Hann window, 50% overlap, segment length
/// `min(4096, len)` rounded down to a power of two.
pub fn power_spectrum(x: &[f64], fs: f64) -> Result<Spectrum> {
    if x.len() < 8 {
        return Err(Error::invalid(format!(
            "power_spectrum needs at least 8 samples, got {}",
            x.len()
        )));
    }
    if !(fs > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    let seg = prev_power_of_two(x.len().min(4096));
    let hop = seg / 2;
    let window = hann(seg);
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let n_bins = seg / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    let mut count = 0usize;
    let mut start = 0;
    while start + seg <= x.len() {
        for ((b, &v), &w) in buf.iter_mut().zip(&x[start..start + seg]).zip(&window) {
            *b = Complex64::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += hop;
    }
    let norm = 1.0 / (count as f64 * seg as f64 * win_energy);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || k == seg / 2 { 1.0 } else { 2.0 };
            a * norm * one_sided
        })
        .collect();
    let freqs_hz = (0..n_bins).map(|k| k as f64 * fs / seg as f64).collect();
    Ok(Spectrum {
        freqs_hz,
        power,
        source_rate_hz: fs,
    })
}

fn prev_power_of_two(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    1 << (usize::BITS - 1 - n.leading_zeros())
}

/// Frequency-domain descriptors s15..s25.
///
/// | key | descriptor |
/// |-----|------------|
/// | s15 | spectral centroid (Hz) |
/// | s16 | spectral spread (Hz) |
/// | s17 | 95% roll-off frequency (Hz) |
/// | s18 | spectral flatness |
/// | s19 | −20 dB bandwidth (Hz) |
/// | s20 | peak frequency (Hz) |
/// | s21..s25 | band energies, see [`BANDS_HZ`] |
pub fn spectral_descriptors(s: &Spectrum) -> DescriptorSet {
    let mut out = DescriptorSet::default();
    let total = s.total_power();
    let f = &s.freqs_hz;
    let p = &s.power;

    if total > 0.0 {
        let centroid = f.iter().zip(p).map(|(f, p)| f * p).sum::<f64>() / total;
        let var = f
            .iter()
            .zip(p)
            .map(|(f, p)| (f - centroid).powi(2) * p)
            .sum::<f64>()
            / total;
        let mut cum = 0.0;
        let mut rolloff = *f.last().unwrap_or(&0.0);
        for (fk, pk) in f.iter().zip(p) {
            cum += pk;
            if cum >= ROLLOFF_FRACTION * total {
                rolloff = *fk;
                break;
            }
        }
        let (peak_idx, peak) = p
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let threshold = peak * 10f64.powf(BANDWIDTH_DB / 10.0);
        let above: Vec<f64> = f
            .iter()
            .zip(p)
            .filter(|(_, &pk)| pk >= threshold)
            .map(|(fk, _)| *fk)
            .collect();
        let bandwidth = above.last().unwrap() - above.first().unwrap();
        let log_mean = p.iter().map(|v| v.max(FLATNESS_FLOOR).ln()).sum::<f64>() / p.len() as f64;
        let arith = p.iter().map(|v| v.max(FLATNESS_FLOOR)).sum::<f64>() / p.len() as f64;
        out.push("s15", centroid);
        out.push("s16", var.sqrt());
        out.push("s17", rolloff);
        out.push("s18", log_mean.exp() / arith);
        out.push("s19", bandwidth);
        out.push("s20", f[peak_idx]);
    } else {
        for key in ["s15", "s16", "s17", "s18", "s19", "s20"] {
            out.push(key, 0.0);
        }
        out.flag("zero_spectrum");
    }

    let nyq = s.nyquist();
    for (i, &(lo, hi)) in BANDS_HZ.iter().enumerate() {
        let energy: f64 = f
            .iter()
            .zip(p)
            .filter(|(&fk, _)| if i == 0 { fk >= lo && fk <= hi } else { fk > lo && fk <= hi })
            .map(|(_, pk)| pk)
            .sum();
        out.push(["s21", "s22", "s23", "s24", "s25"][i], energy);
        if hi > nyq {
            out.flag(&format!("band_{}_{}_truncated_at_nyquist", lo as u32, hi as u32));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn sine(freq: f64, fs: f64, secs: f64) -> Vec<f64> {
        let n = (fs * secs) as usize;
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / fs).sin()).collect()
    }

    fn peak_freq(s: &Spectrum) -> f64 {
        let i = s
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        s.freqs_hz[i]
    }

    #[test]
    fn sine_peak_within_one_bin() {
        let s = power_spectrum(&sine(100.0, 2000.0, 2.0), 2000.0).unwrap();
        assert!((peak_freq(&s) - 100.0).abs() <= s.bin_width());
        assert_eq!(*s.freqs_hz.last().unwrap(), 1000.0);
        assert!(s.freqs_hz.windows(2).all(|w| w[1] > w[0]));
        // Total power of a unit sine is 1/2.
        assert!((s.total_power() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn zero_signal_zero_power() {
        let s = power_spectrum(&[0.0; 256], 1000.0).unwrap();
        assert!(s.power.iter().all(|&p| p == 0.0));
        let d = spectral_descriptors(&s);
        assert!(d.flags.contains(&"zero_spectrum".to_string()));
        assert_eq!(d.get("s15"), Some(0.0));
    }

    #[test]
    fn too_short_is_error() {
        assert!(power_spectrum(&[1.0; 7], 100.0).is_err());
    }

    #[test]
    fn parseval_per_segment() {
        let mut rng = crate::rng::rng_from(5);
        let x: Vec<f64> = (0..1000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = power_spectrum(&x, 1000.0).unwrap();
        // 1000 samples -> one 512 segment at 0 and one at 256 (and 488 doesn't fit).
        let seg = 512;
        let w = hann(seg);
        let we: f64 = w.iter().map(|v| v * v).sum();
        let mut expect = 0.0;
        let mut n = 0;
        let mut start = 0;
        while start + seg <= x.len() {
            expect += x[start..start + seg].iter().zip(&w).map(|(a, b)| (a * b).powi(2)).sum::<f64>() / we;
            n += 1;
            start += seg / 2;
        }
        expect /= n as f64;
        assert!((s.total_power() - expect).abs() < 1e-12 * expect.max(1.0));
    }

    /// Direct O(N^2) DFT of the Hann-windowed segments, same normalization.
    fn dft_oracle(x: &[f64], fs: f64) -> Vec<f64> {
        let mut seg = 1;
        while seg * 2 <= x.len().min(4096) {
            seg *= 2;
        }
        let w: Vec<f64> = (0..seg).map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / seg as f64).cos())).collect();
        let we: f64 = w.iter().map(|v| v * v).sum();
        let mut acc = vec![0.0; seg / 2 + 1];
        let mut count = 0;
        let mut start = 0;
        while start + seg <= x.len() {
            for (k, a) in acc.iter_mut().enumerate() {
                let (mut re, mut im) = (0.0, 0.0);
                for n in 0..seg {
                    let ang = -2.0 * PI * (k * n) as f64 / seg as f64;
                    let v = x[start + n] * w[n];
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                *a += re * re + im * im;
            }
            count += 1;
            start += seg / 2;
        }
        let _ = fs;
        acc.iter()
            .enumerate()
            .map(|(k, a)| a / (count as f64 * seg as f64 * we) * if k == 0 || k == seg / 2 { 1.0 } else { 2.0 })
            .collect()
    }

    #[test]
    fn two_tone_matches_direct_dft() {
        let fs = 2000.0;
        let n = 1500;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * PI * 100.0 * t).sin() + 0.5 * (2.0 * PI * 300.0 * t).sin()
            })
            .collect();
        let s = power_spectrum(&x, fs).unwrap();
        let oracle = dft_oracle(&x, fs);
        assert_eq!(s.power.len(), oracle.len());
        for (a, b) in s.power.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let mut idx: Vec<usize> = (0..s.power.len()).collect();
        idx.sort_by(|&a, &b| s.power[b].total_cmp(&s.power[a]));
        let top: Vec<f64> = idx.iter().take(6).map(|&i| s.freqs_hz[i]).collect();
        assert!(top.iter().any(|f| (f - 100.0).abs() <= s.bin_width()));
        assert!(top.iter().any(|f| (f - 300.0).abs() <= s.bin_width()));
    }

    fn spectrum(power: Vec<f64>, fs: f64) -> Spectrum {
        let n = power.len();
        Spectrum {
            freqs_hz: (0..n).map(|k| k as f64 * fs / (2.0 * (n - 1) as f64)).collect(),
            power,
            source_rate_hz: fs,
        }
    }

    #[test]
    fn delta_spectrum() {
        // 11 bins over 0..500 Hz, 50 Hz spacing; put everything at 100 Hz.
        let mut p = vec![0.0; 11];
        p[2] = 3.0;
        let d = spectral_descriptors(&spectrum(p, 1000.0));
        assert_eq!(d.get("s15"), Some(100.0));
        assert_eq!(d.get("s16"), Some(0.0));
        assert_eq!(d.get("s20"), Some(100.0));
        assert_eq!(d.get("s21"), Some(3.0));
        assert_eq!(d.get("s22"), Some(0.0));
    }

    #[test]
    fn flat_spectrum_flatness_one() {
        let d = spectral_descriptors(&spectrum(vec![0.7; 65], 1000.0));
        assert!((d.get("s18").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn random_spectrum_matches_definitions() {
        let mut rng = crate::rng::rng_from(17);
        let p: Vec<f64> = (0..257).map(|_| rng.random_range(0.0..2.0)).collect();
        let s = spectrum(p.clone(), 12_000.0);
        let d = spectral_descriptors(&s);
        let f = &s.freqs_hz;
        let tot: f64 = p.iter().sum();
        let mut c = 0.0;
        for i in 0..p.len() {
            c += f[i] * p[i] / tot;
        }
        let mut v = 0.0;
        for i in 0..p.len() {
            v += (f[i] - c) * (f[i] - c) * p[i] / tot;
        }
        let mut roll = 0.0;
        let mut run = 0.0;
        for i in 0..p.len() {
            run += p[i];
            if run >= 0.95 * tot {
                roll = f[i];
                break;
            }
        }
        let gm = (p.iter().map(|x| x.ln()).sum::<f64>() / p.len() as f64).exp();
        let am = tot / p.len() as f64;
        let mut pk = 0;
        for i in 0..p.len() {
            if p[i] > p[pk] {
                pk = i;
            }
        }
        let keep: Vec<usize> = (0..p.len()).filter(|&i| p[i] >= 0.01 * p[pk]).collect();
        let bw = f[*keep.last().unwrap()] - f[keep[0]];
        let mut bands = [0.0; 5];
        for i in 0..p.len() {
            let fi = f[i];
            if fi <= 100.0 {
                bands[0] += p[i];
            } else if fi <= 500.0 {
                bands[1] += p[i];
            } else if fi <= 1000.0 {
                bands[2] += p[i];
            } else if fi <= 2000.0 {
                bands[3] += p[i];
            } else if fi <= 5000.0 {
                bands[4] += p[i];
            }
        }
        let close = |k: &str, e: f64| {
            let g = d.get(k).unwrap();
            assert!((g - e).abs() <= 1e-9 * e.abs().max(1.0), "{k}: {g} vs {e}");
        };
        close("s15", c);
        close("s16", v.sqrt());
        close("s17", roll);
        close("s18", gm / am);
        close("s19", bw);
        close("s20", f[pk]);
        for (i, k) in ["s21", "s22", "s23", "s24", "s25"].iter().enumerate() {
            close(k, bands[i]);
        }
        let band_sum: f64 = bands.iter().sum();
        assert!(band_sum <= tot + 1e-12);
    }

    #[test]
    fn low_rate_flags_truncated_band() {
        let s = power_spectrum(&sine(100.0, 2000.0, 1.0), 2000.0).unwrap();
        let d = spectral_descriptors(&s);
        assert!(d.flags.iter().any(|f| f.contains("truncated")));
    }
}
