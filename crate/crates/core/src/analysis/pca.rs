use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::{check_finite, sorted_eigen};
use crate::error::{Error, Result};
use crate::models::Standardizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// k rows of length p, orthonormal.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    /// n rows of length k.
    pub scores: Vec<Vec<f64>>,
    pub standardized: bool,
    pub mean: Vec<f64>,
    /// Column scale divided out before projection (all ones unless standardized).
    pub scale: Vec<f64>,
}

impl PcaResult {
    /// Map scores back to the input space.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        self.scores
            .iter()
            .map(|s| {
                (0..self.mean.len())
                    .map(|j| {
                        let z: f64 = s.iter().zip(&self.components).map(|(a, c)| a * c[j]).sum();
                        z * self.scale[j] + self.mean[j]
                    })
                    .collect()
            })
            .collect()
    }
}

/// Principal components of the covariance matrix, or of the correlation
/// matrix when `standardize` is set. Constant columns keep unit scale.
pub fn pca(x: &[Vec<f64>], k: usize, standardize: bool) -> Result<PcaResult> {
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("PCA needs at least 2 samples"));
    }
    let p = x[0].len();
    if x.iter().any(|r| r.len() != p) {
        return Err(Error::invalid("PCA rows have unequal lengths"));
    }
    if k == 0 || k > n.min(p) {
        return Err(Error::invalid(format!("PCA k={k} outside 1..={}", n.min(p))));
    }
    check_finite(x, "PCA input")?;

    let (mean, scale) = if standardize {
        let s = Standardizer::fit(x)?;
        (s.mean, s.std)
    } else {
        let mean = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        (mean, vec![1.0; p])
    };
    let z = DMatrix::from_fn(n, p, |i, j| (x[i][j] - mean[j]) / scale[j]);
    let cov = z.transpose() * &z / (n - 1) as f64;
    let (values, vectors) = sorted_eigen(cov);
    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
    let explained_variance_ratio = values[..k]
        .iter()
        .map(|v| if total > 0.0 { v.max(0.0) / total } else { 0.0 })
        .collect();
    let components: Vec<Vec<f64>> = vectors.into_iter().take(k).collect();
    let scores = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|c| c.iter().enumerate().map(|(j, w)| w * z[(i, j)]).sum())
                .collect()
        })
        .collect();
    Ok(PcaResult { components, explained_variance_ratio, scores, standardized: standardize, mean, scale })
}
