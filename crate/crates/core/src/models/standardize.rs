use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-feature z-scoring captured on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation, or 1 for constant features.
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::invalid("standardization needs at least 2 rows"));
        }
        let p = x[0].len();
        if x.iter().any(|r| r.len() != p) {
            return Err(Error::invalid("ragged feature matrix"));
        }
        if x.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value in feature matrix"));
        }
        let n = x.len() as f64;
        let mut mean = vec![0.0; p];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; p];
        for row in x {
            for j in 0..p {
                var[j] += (row[j] - mean[j]).powi(2);
            }
        }
        let mut constant = vec![false; p];
        let std = var
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let s = (v / n).sqrt();
                if s > 1e-12 * mean[j].abs().max(1.0) {
                    s
                } else {
                    constant[j] = true;
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std, constant })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter()
            .map(|r| {
                if r.len() != self.n_features() {
                    return Err(Error::invalid(format!(
                        "expected {} features, got {}",
                        self.n_features(),
                        r.len()
                    )));
                }
                if r.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("non-finite value in feature matrix"));
                }
                Ok(self.apply_row(r))
            })
            .collect()
    }
}
