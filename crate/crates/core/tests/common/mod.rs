//! Independent oracles shared by integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Straight-line MFCC: O(N²) DFT per frame, filterbank built from the mel
/// formula, log with floor, orthonormal DCT-II, mean over frames.
pub fn reference_mfcc(x: &[f64], fs: f64, frame: usize, hop: usize, n_mels: usize, n_coeffs: usize) -> Vec<f64> {
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let edges: Vec<f64> = (0..n_mels + 2).map(|i| hz(mel(fs / 2.0) * i as f64 / (n_mels + 1) as f64)).collect();
    let weight = |m: usize, f: f64| {
        let (l, c, r) = (edges[m], edges[m + 1], edges[m + 2]);
        if f > l && f <= c {
            (f - l) / (c - l)
        } else if f > c && f < r {
            (r - f) / (r - c)
        } else {
            0.0
        }
    };
    let bins = frame / 2 + 1;
    let frames = 1 + (x.len() - frame) / hop;
    let mut out = vec![0.0; n_coeffs];
    for t in 0..frames {
        let seg: Vec<f64> = (0..frame)
            .map(|i| x[t * hop + i] * (0.5 - 0.5 * (2.0 * PI * i as f64 / frame as f64).cos()))
            .collect();
        let mags: Vec<f64> = (0..bins)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, v) in seg.iter().enumerate() {
                    let ang = -2.0 * PI * (k * i % frame) as f64 / frame as f64;
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect();
        let logs: Vec<f64> = (0..n_mels)
            .map(|m| {
                let e: f64 = (0..bins).map(|k| weight(m, k as f64 * fs / frame as f64) * mags[k]).sum();
                e.max(1e-10).ln()
            })
            .collect();
        for (k, o) in out.iter_mut().enumerate() {
            let norm = if k == 0 { (1.0 / n_mels as f64).sqrt() } else { (2.0 / n_mels as f64).sqrt() };
            let c: f64 = logs
                .iter()
                .enumerate()
                .map(|(n, v)| v * (PI * k as f64 * (2 * n + 1) as f64 / (2 * n_mels) as f64).cos())
                .sum();
            *o += norm * c / frames as f64;
        }
    }
    out
}

/// Spearman ρ by counting ranks and the textbook Pearson sums.
pub fn brute_spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .map(|v| {
                let less = x.iter().filter(|w| *w < v).count() as f64;
                let equal = x.iter().filter(|w| *w == v).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = ra.len() as f64;
    let (sa, sb) = (ra.iter().sum::<f64>(), rb.iter().sum::<f64>());
    let sab: f64 = ra.iter().zip(&rb).map(|(x, y)| x * y).sum();
    let saa: f64 = ra.iter().map(|x| x * x).sum();
    let sbb: f64 = rb.iter().map(|x| x * x).sum();
    (n * sab - sa * sb) / ((n * saa - sa * sa).sqrt() * (n * sbb - sb * sb).sqrt())
}
