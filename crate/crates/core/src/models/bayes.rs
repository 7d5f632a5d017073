use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Gaussian naive Bayes with per-class feature means and variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub(crate) fn fit(x: &[Vec<f64>], labels: &[usize], n_classes: usize, var_floor: f64) -> Self {
        let p = x[0].len();
        let mut count = vec![0.0; n_classes];
        let mut mean = vec![vec![0.0; p]; n_classes];
        for (row, &c) in x.iter().zip(labels) {
            count[c] += 1.0;
            for j in 0..p {
                mean[c][j] += row[j];
            }
        }
        for c in 0..n_classes {
            mean[c].iter_mut().for_each(|m| *m /= count[c]);
        }
        let mut var = vec![vec![0.0; p]; n_classes];
        for (row, &c) in x.iter().zip(labels) {
            for j in 0..p {
                var[c][j] += (row[j] - mean[c][j]).powi(2);
            }
        }
        for c in 0..n_classes {
            var[c].iter_mut().for_each(|v| *v = (*v / count[c]).max(var_floor));
        }
        let n = x.len() as f64;
        Self {
            log_prior: count.iter().map(|c| (c / n).ln()).collect(),
            mean,
            var,
        }
    }

    pub fn joint_log_likelihood(&self, row: &[f64]) -> Vec<f64> {
        (0..self.log_prior.len())
            .map(|c| {
                self.log_prior[c]
                    + row
                        .iter()
                        .zip(self.mean[c].iter().zip(&self.var[c]))
                        .map(|(x, (m, v))| -0.5 * (2.0 * PI * v).ln() - (x - m).powi(2) / (2.0 * v))
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn posterior(&self, row: &[f64]) -> Vec<f64> {
        softmax(&self.joint_log_likelihood(row))
    }
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}
