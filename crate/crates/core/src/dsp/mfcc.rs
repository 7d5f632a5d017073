use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use super::spectrum::hann;
use crate::error::{Error, Result};

/// MFCC framing and filterbank parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfccConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub n_coeffs: usize,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            frame_len: 1024,
            hop: 512,
            n_mels: 40,
            n_coeffs: 14,
            log_floor: 1e-10,
        }
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with unit peak, edges evenly spaced on the mel scale
/// from 0 Hz to Nyquist. Returns `n_mels` rows over `frame_len/2 + 1` bins.
fn mel_filterbank(n_mels: usize, frame_len: usize, fs: f64) -> Vec<Vec<f64>> {
    let n_bins = frame_len / 2 + 1;
    let top = hz_to_mel(fs / 2.0);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
        .collect();
    (0..n_mels)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..n_bins)
                .map(|k| {
                    let f = k as f64 * fs / frame_len as f64;
                    if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Frame-averaged MFCCs: Hann-windowed magnitude spectra, mel filterbank,
/// natural log with a floor, orthonormal DCT-II, mean over frames.
pub fn mfcc(x: &[f64], fs: f64, cfg: &MfccConfig) -> Result<Vec<f64>> {
    if x.len() < cfg.frame_len {
        return Err(Error::invalid(format!(
            "MFCC needs at least one {}-sample frame, got {} samples",
            cfg.frame_len,
            x.len()
        )));
    }
    if cfg.n_coeffs > cfg.n_mels || cfg.hop == 0 {
        return Err(Error::invalid("invalid MFCC configuration"));
    }
    let bank = mel_filterbank(cfg.n_mels, cfg.frame_len, fs);
    let window = hann(cfg.frame_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.frame_len);
    let n_bins = cfg.frame_len / 2 + 1;
    let n_frames = 1 + (x.len() - cfg.frame_len) / cfg.hop;

    let nm = cfg.n_mels as f64;
    let dct: Vec<Vec<f64>> = (0..cfg.n_coeffs)
        .map(|k| {
            let scale = if k == 0 { (1.0 / nm).sqrt() } else { (2.0 / nm).sqrt() };
            (0..cfg.n_mels)
                .map(|n| scale * (PI * k as f64 * (2 * n + 1) as f64 / (2.0 * nm)).cos())
                .collect()
        })
        .collect();

    let mut acc = vec![0.0; cfg.n_coeffs];
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.frame_len];
    let mut mags = vec![0.0; n_bins];
    let mut log_mel = vec![0.0; cfg.n_mels];
    for frame in 0..n_frames {
        let start = frame * cfg.hop;
        for ((b, &v), &w) in buf
            .iter_mut()
            .zip(&x[start..start + cfg.frame_len])
            .zip(&window)
        {
            *b = Complex64::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (m, b) in mags.iter_mut().zip(&buf) {
            *m = b.norm();
        }
        for (lm, filt) in log_mel.iter_mut().zip(&bank) {
            let e: f64 = filt.iter().zip(&mags).map(|(w, m)| w * m).sum();
            *lm = e.max(cfg.log_floor).ln();
        }
        for (a, row) in acc.iter_mut().zip(&dct) {
            *a += row.iter().zip(&log_mel).map(|(c, v)| c * v).sum::<f64>();
        }
    }
    for a in &mut acc {
        *a /= n_frames as f64;
    }
    Ok(acc)
}
