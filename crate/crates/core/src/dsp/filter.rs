//! Butterworth band-pass design (bilinear transform of the analog prototype)
//! and zero-phase forward-backward filtering over second-order sections.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// Biquad coefficients `[b0, b1, b2, a1, a2]` with `a0 = 1`.
type Section = [f64; 5];

/// Digital Butterworth band-pass as a cascade of second-order sections.
#[derive(Debug, Clone)]
pub struct Butterworth {
    sections: Vec<Section>,
}

impl Butterworth {
    /// Band-pass of prototype order `order` (the cascade has `order` biquads).
    pub fn bandpass(order: usize, fs: f64, lo: f64, hi: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("filter order must be positive"));
        }
        if !(fs > 0.0 && lo > 0.0 && lo < hi && hi < fs / 2.0) {
            return Err(Error::invalid(format!(
                "band edges must satisfy 0 < lo < hi < fs/2 (lo={lo}, hi={hi}, fs={fs})"
            )));
        }
        let fs2 = 2.0 * fs;
        let w_lo = fs2 * (PI * lo / fs).tan();
        let w_hi = fs2 * (PI * hi / fs).tan();
        let bw = w_hi - w_lo;
        let w0 = (w_lo * w_hi).sqrt();

        let mut sections = Vec::with_capacity(order);
        let n = order as f64;
        for k in 1..=order {
            let theta = PI * (2.0 * k as f64 + n - 1.0) / (2.0 * n);
            let p = Complex64::from_polar(1.0, theta);
            let half = p * (bw / 2.0);
            let disc = (half * half - w0 * w0).sqrt();
            for s in [half + disc, half - disc] {
                let z = (fs2 + s) / (fs2 - s);
                if z.im > 0.0 {
                    sections.push([1.0, 0.0, -1.0, -2.0 * z.re, z.norm_sqr()]);
                }
            }
        }
        debug_assert_eq!(sections.len(), order);

        // Unit gain at the digital image of the geometric center frequency.
        let wc = 2.0 * (w0 / fs2).atan();
        for sec in &mut sections {
            let g = section_response(sec, wc).norm();
            sec[0] /= g;
            sec[1] /= g;
            sec[2] /= g;
        }
        Ok(Self { sections })
    }

    pub fn sections(&self) -> usize {
        self.sections.len()
    }

    /// Magnitude response at `freq` Hz for sample rate `fs`.
    pub fn magnitude(&self, freq: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * freq / fs;
        self.sections
            .iter()
            .map(|s| section_response(s, w).norm())
            .product()
    }

    /// Causal filtering with steady-state initial conditions scaled by `x[0]`.
    fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        if x.is_empty() {
            return y;
        }
        let mut step = x[0];
        for sec in &self.sections {
            let [b0, b1, b2, a1, a2] = *sec;
            let g = (b0 + b1 + b2) / (1.0 + a1 + a2);
            let mut z2 = (b2 - a2 * g) * step;
            let mut z1 = (b1 - a1 * g) * step + z2;
            step *= g;
            for v in y.iter_mut() {
                let xin = *v;
                let out = b0 * xin + z1;
                z1 = b1 * xin - a1 * out + z2;
                z2 = b2 * xin - a2 * out;
                *v = out;
            }
        }
        y
    }

    /// Zero-phase filtering: odd extension at both ends, forward pass,
    /// backward pass, trim.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return self.filter(x);
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        let mut y = self.filter(&ext);
        y.reverse();
        let mut y = self.filter(&y);
        y.reverse();
        y[pad..pad + n].to_vec()
    }
}

fn section_response(sec: &Section, w: f64) -> Complex64 {
    let z1 = Complex64::from_polar(1.0, -w);
    let z2 = z1 * z1;
    let num = sec[0] + z1 * sec[1] + z2 * sec[2];
    let den = 1.0 + z1 * sec[3] + z2 * sec[4];
    num / den
}

/// Zero-phase 4th-order Butterworth band-pass.
pub fn bandpass(x: &[f64], fs: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
    Ok(Butterworth::bandpass(4, fs, lo, hi)?.filtfilt(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sine(freq: f64, fs: f64, secs: f64) -> Vec<f64> {
        let n = (fs * secs) as usize;
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / fs).sin()).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn passband_sine_survives() {
        let x = sine(500.0, 10_000.0, 1.0);
        let y = bandpass(&x, 10_000.0, 20.0, 1000.0).unwrap();
        assert_eq!(y.len(), x.len());
        assert!(rms(&y) >= 0.9 * rms(&x), "{} vs {}", rms(&y), rms(&x));
    }

    #[test]
    fn stopband_sine_is_attenuated() {
        let x = sine(5.0, 10_000.0, 2.0);
        let y = bandpass(&x, 10_000.0, 20.0, 1000.0).unwrap();
        assert!(rms(&y) <= 0.1 * rms(&x), "{} vs {}", rms(&y), rms(&x));
    }

    #[test]
    fn zero_in_zero_out() {
        let y = bandpass(&[0.0; 500], 10_000.0, 20.0, 1000.0).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn response_shape() {
        let f = Butterworth::bandpass(4, 10_000.0, 20.0, 1000.0).unwrap();
        assert_eq!(f.sections(), 4);
        // Half-power at the band edges, unity at the center.
        assert!((f.magnitude(20.0, 10_000.0) - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((f.magnitude(1000.0, 10_000.0) - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((f.magnitude((20.0f64 * 1000.0).sqrt(), 10_000.0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(bandpass(&[0.0; 10], 1000.0, 20.0, 600.0).is_err());
        assert!(bandpass(&[0.0; 10], 1000.0, 200.0, 100.0).is_err());
        assert!(bandpass(&[0.0; 10], 1000.0, 0.0, 100.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn filter_is_linear(seed in 0u64..10_000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            use rand::Rng;
            let mut rng = crate::rng::rng_from(seed);
            let x: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let fx = bandpass(&x, 10_000.0, 20.0, 1000.0).unwrap();
            let fy = bandpass(&y, 10_000.0, 20.0, 1000.0).unwrap();
            let fm = bandpass(&mix, 10_000.0, 20.0, 1000.0).unwrap();
            for i in 0..400 {
                prop_assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
            }
        }
    }
}
