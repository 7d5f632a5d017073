use rand_distr::{Distribution, Normal};

use crate::curvefit::{eval_model, ModelKind};
use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Sampling interval on which `params` of `kind` are identifiable: several
/// time constants for the exponential, both tails of the logistic, two
/// decades of x for the power law and 4PL.
pub fn curve_domain(kind: ModelKind, params: &[f64]) -> (f64, f64) {
    match kind {
        ModelKind::Exponential => (0.0, 6.0 / params[1].abs()),
        ModelKind::Logistic => {
            let w = 8.0 / params[1].abs();
            (params[2] - w, params[2] + w)
        }
        ModelKind::PowerLaw => (0.1, 10.0),
        ModelKind::FourPl => (params[2] / 20.0, params[2] * 20.0),
    }
}

/// `n` evenly spaced samples of the curve over [`curve_domain`], plus
/// seeded Gaussian noise with σ = `noise_frac` × range(y).
pub fn gen_curve(kind: ModelKind, params: &[f64], n: usize, noise_frac: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::invalid("a curve needs at least 2 samples"));
    }
    let (lo, hi) = curve_domain(kind, params);
    let x: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let mut y = eval_model(kind, params, &x)?;
    if noise_frac > 0.0 {
        let (ylo, yhi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let noise = Normal::new(0.0, noise_frac * (yhi - ylo)).map_err(|e| Error::invalid(e.to_string()))?;
        let mut rng = rng_from(seed);
        y.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
    }
    Ok((x, y))
}

/// 25 parameter combinations per kind spanning the ranges the extractors
/// meet: 5 values of the rate/shape parameter × 5 amplitudes.
pub fn recovery_grid(kind: ModelKind) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            let (fi, fj) = (i as f64, j as f64);
            out.push(match kind {
                ModelKind::Exponential => {
                    let a = [0.5, 1.0, 2.0, 4.0, 8.0][j];
                    vec![a, [0.3, 0.7, 1.5, 3.0, 6.0][i], 0.1 * a * (fi - 2.0) + 0.05]
                }
                ModelKind::Logistic => vec![
                    [-800.0, -50.0, 2.0, 10.0, 300.0][j],
                    [-4.0, -1.0, 0.5, 2.0, 5.0][i],
                    1.0 + fj + 0.5 * fi,
                ],
                ModelKind::PowerLaw => vec![
                    [-40.0, -3.0, 0.5, 2.0, 15.0][j],
                    [-0.8, -0.4, 0.3, 0.6, 1.2][i],
                    -100.0 + 50.0 * fj + 7.0 * fi,
                ],
                ModelKind::FourPl => vec![
                    32.0 + 0.5 * fi,
                    [1.5, 2.0, 3.0, 4.5, 6.0][i],
                    [0.5, 1.0, 2.0, 4.0, 8.0][j],
                    [20.0, 24.0, 27.0, 29.0, 30.5][j],
                ],
            });
        }
    }
    out
}
