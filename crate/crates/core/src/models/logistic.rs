use serde::{Deserialize, Serialize};

use super::bayes::softmax;

/// Multinomial logistic regression: one weight row and bias per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Logistic {
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(row).map(|(a, x)| a * x).sum::<f64>())
            .collect()
    }

    pub fn probabilities(&self, row: &[f64]) -> Vec<f64> {
        softmax(&self.scores(row))
    }
}

/// Mean cross-entropy plus `l2/(2n)·‖W‖²` (bias unpenalized) and its gradient.
/// Parameters are packed class-major as `[w_0.., b_0, w_1.., b_1, ...]`.
fn objective(theta: &[f64], x: &[Vec<f64>], y: &[usize], k: usize, l2: f64) -> (f64, Vec<f64>) {
    let p = x[0].len();
    let stride = p + 1;
    let n = x.len() as f64;
    let mut grad = vec![0.0; theta.len()];
    let mut loss = 0.0;
    let mut z = vec![0.0; k];
    for (row, &c) in x.iter().zip(y) {
        for (cls, zc) in z.iter_mut().enumerate() {
            let w = &theta[cls * stride..cls * stride + p];
            *zc = theta[cls * stride + p] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
        }
        let m = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - z[c];
        for cls in 0..k {
            let r = (z[cls] - lse).exp() - if cls == c { 1.0 } else { 0.0 };
            let g = &mut grad[cls * stride..(cls + 1) * stride];
            for j in 0..p {
                g[j] += r * row[j];
            }
            g[p] += r;
        }
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    for cls in 0..k {
        for j in 0..p {
            let w = theta[cls * stride + j];
            loss += l2 / (2.0 * n) * w * w;
            grad[cls * stride + j] += l2 / n * w;
        }
    }
    (loss, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS (memory 10) with Armijo backtracking, stopping when the largest
/// gradient component falls below `tol`.
pub(crate) fn fit_logistic(x: &[Vec<f64>], y: &[usize], k: usize, l2: f64, tol: f64, max_iter: usize) -> Logistic {
    let p = x[0].len();
    let dim = k * (p + 1);
    let mut theta = vec![0.0; dim];
    let (mut f, mut g) = objective(&theta, x, y, k, l2);
    let mut mem: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        if g.iter().fold(0.0f64, |a, v| a.max(v.abs())) < tol {
            converged = true;
            break;
        }
        iterations += 1;
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alpha = vec![0.0; mem.len()];
        for (i, (s, yv, rho)) in mem.iter().enumerate().rev() {
            alpha[i] = rho * dot(s, &q);
            q.iter_mut().zip(yv).for_each(|(qv, yy)| *qv -= alpha[i] * yy);
        }
        if let Some((s, yv, _)) = mem.last() {
            let gamma = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for (i, (s, yv, rho)) in mem.iter().enumerate() {
            let beta = rho * dot(yv, &q);
            q.iter_mut().zip(s).for_each(|(qv, sv)| *qv += (alpha[i] - beta) * sv);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            mem.clear();
        }
        let mut step = 1.0;
        let (next, fn_, gn) = loop {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + step * d).collect();
            let (fc, gc) = objective(&cand, x, y, k, l2);
            if fc <= f + 1e-4 * step * slope || step < 1e-20 {
                break (cand, fc, gc);
            }
            step *= 0.5;
        };
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&yv, &yv).max(1e-300) {
            if mem.len() == 10 {
                mem.remove(0);
            }
            mem.push((s, yv, 1.0 / sy));
        }
        let stalled = (f - fn_).abs() <= 1e-16 * f.abs().max(1.0) && step < 1e-10;
        theta = next;
        f = fn_;
        g = gn;
        if stalled {
            break;
        }
    }
    if !converged && g.iter().fold(0.0f64, |a, v| a.max(v.abs())) < tol {
        converged = true;
    }
    let stride = p + 1;
    Logistic {
        weights: (0..k).map(|c| theta[c * stride..c * stride + p].to_vec()).collect(),
        bias: (0..k).map(|c| theta[c * stride + p]).collect(),
        iterations,
        converged,
    }
}
