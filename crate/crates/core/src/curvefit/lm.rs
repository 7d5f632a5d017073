use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::{default_init, sorted_points, ModelKind};
use crate::error::{Error, Result};

/// Solver constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub cost_rel_tol: f64,
    pub step_tol: f64,
    pub max_iterations: usize,
    /// Central-difference step, relative to the parameter magnitude.
    pub jacobian_rel_step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            cost_rel_tol: 1e-10,
            step_tol: 1e-10,
            max_iterations: 200,
            jacobian_rel_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: ModelKind,
    pub params: Vec<f64>,
    /// 0 with `r_squared_defined == false` when the target is constant.
    pub r_squared: f64,
    pub r_squared_defined: bool,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.kind
            .param_names()
            .iter()
            .position(|n| *n == name)
            .map(|i| self.params[i])
    }
}

/// Fit with default settings and all parameters free.
pub fn fit(kind: ModelKind, x: &[f64], y: &[f64], init: Option<&[f64]>) -> Result<FitResult> {
    fit_with(kind, x, y, init, &[], &FitConfig::default())
}

/// Internal parameterization: the 4PL inflection point is optimized as
/// `ln c` so it stays positive; every other parameter is unbounded.
struct Problem<'a> {
    kind: ModelKind,
    x: &'a [f64],
    y: &'a [f64],
    base: Vec<f64>,
    free: Vec<usize>,
}

impl Problem<'_> {
    fn log_c(&self, i: usize) -> bool {
        self.kind == ModelKind::FourPl && i == 2
    }

    fn to_internal(&self, p: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .map(|&i| if self.log_c(i) { p[i].ln() } else { p[i] })
            .collect()
    }

    fn to_external(&self, theta: &[f64]) -> Vec<f64> {
        let mut p = self.base.clone();
        for (&i, &t) in self.free.iter().zip(theta) {
            p[i] = if self.log_c(i) { t.exp() } else { t };
        }
        p
    }

    fn residuals(&self, theta: &[f64]) -> DVector<f64> {
        let p = self.to_external(theta);
        DVector::from_iterator(
            self.x.len(),
            self.x
                .iter()
                .zip(self.y)
                .map(|(&xi, &yi)| self.kind.eval_point(&p, xi) - yi),
        )
    }

    fn jacobian(&self, theta: &[f64], rel_step: f64) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.x.len(), theta.len());
        let mut t = theta.to_vec();
        for col in 0..theta.len() {
            let h = rel_step * theta[col].abs().max(1e-3);
            t[col] = theta[col] + h;
            let plus = self.residuals(&t);
            t[col] = theta[col] - h;
            let minus = self.residuals(&t);
            t[col] = theta[col];
            j.set_column(col, &((plus - minus) / (2.0 * h)));
        }
        j
    }
}

fn cost_of(r: &DVector<f64>) -> f64 {
    let c = 0.5 * r.norm_squared();
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}

/// Levenberg–Marquardt with a central-difference Jacobian and Marquardt
/// diagonal scaling. `fixed[i] = Some(v)` pins parameter `i` to `v`.
///
/// Points are sorted by `(x, y)` first, so the result does not depend on
/// input order. When the solver does not converge the best parameters seen
/// are returned with `converged == false`.
pub fn fit_with(
    kind: ModelKind,
    x: &[f64],
    y: &[f64],
    init: Option<&[f64]>,
    fixed: &[Option<f64>],
    cfg: &FitConfig,
) -> Result<FitResult> {
    let np = kind.n_params();
    if x.len() != y.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite input to fit"));
    }
    if kind.requires_positive_x() && x.iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid(format!("{kind} requires x > 0")));
    }
    if fixed.len() > np {
        return Err(Error::invalid("too many fixed parameters"));
    }
    let n_free = (0..np).filter(|&i| fixed.get(i).copied().flatten().is_none()).count();
    if x.len() < n_free + 1 {
        return Err(Error::invalid(format!(
            "{kind} fit needs at least {} points, got {}",
            n_free + 1,
            x.len()
        )));
    }
    let (xs, ys) = sorted_points(x, y);
    let mut start = match init {
        Some(p) if p.len() == np => p.to_vec(),
        Some(p) => {
            return Err(Error::invalid(format!(
                "{kind} init has {} values, expected {np}",
                p.len()
            )))
        }
        None => default_init(kind, &xs, &ys)?,
    };
    for (i, f) in fixed.iter().enumerate() {
        if let Some(v) = f {
            start[i] = *v;
        }
    }
    if kind == ModelKind::FourPl && !(start[2] > 0.0) {
        return Err(Error::invalid("four_pl inflection c must start positive"));
    }
    let problem = Problem {
        kind,
        x: &xs,
        y: &ys,
        free: (0..np).filter(|&i| fixed.get(i).copied().flatten().is_none()).collect(),
        base: start.clone(),
    };

    let mut theta = problem.to_internal(&start);
    let mut r = problem.residuals(&theta);
    let mut cost = cost_of(&r);
    let mut lambda = cfg.lambda_init;
    let mut iterations = 0;
    let mut converged = false;

    if cost == 0.0 || theta.is_empty() {
        converged = true;
    }
    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        let j = problem.jacobian(&theta, cfg.jacobian_rel_step);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        if g.amax() == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while iterations <= cfg.max_iterations {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let step = a.cholesky().map(|c| c.solve(&(-&g)));
            if let Some(step) = step {
                let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
                let r_new = problem.residuals(&cand);
                let cost_new = cost_of(&r_new);
                let theta_norm = DVector::from_column_slice(&theta).norm();
                if cost_new < cost {
                    let rel = (cost - cost_new) / cost;
                    theta = cand;
                    r = r_new;
                    cost = cost_new;
                    lambda = (lambda / cfg.lambda_down).max(1e-12);
                    if rel < cfg.cost_rel_tol
                        || step.norm() < cfg.step_tol * (theta_norm + cfg.step_tol)
                        || cost == 0.0
                    {
                        converged = true;
                    }
                    accepted = true;
                    break;
                }
                if step.norm() < cfg.step_tol * (theta_norm + cfg.step_tol) {
                    converged = true;
                    break;
                }
            }
            lambda *= cfg.lambda_up;
            if lambda > 1e16 {
                converged = true;
                break;
            }
            iterations += 1;
        }
        if !accepted && !converged {
            break;
        }
    }

    let params = problem.to_external(&theta);
    let fitted: Vec<f64> = xs.iter().map(|&xi| kind.eval_point(&params, xi)).collect();
    let (r_squared, r_squared_defined) = match super::r_squared(&ys, &fitted) {
        Ok(v) => (v, true),
        Err(_) => (0.0, false),
    };
    Ok(FitResult {
        kind,
        params,
        r_squared,
        r_squared_defined,
        residual_norm: (2.0 * cost).sqrt(),
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::super::eval_model;
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn recovers_noiseless_exponential() {
        let x = grid(0.0, 3.0, 100);
        let y = eval_model(ModelKind::Exponential, &[2.0, 0.5, 0.0], &x).unwrap();
        let f = fit(ModelKind::Exponential, &x, &y, None).unwrap();
        assert!((f.params[0] - 2.0).abs() / 2.0 < 1e-4, "{f:?}");
        assert!((f.params[1] - 0.5).abs() / 0.5 < 1e-4, "{f:?}");
        assert!(f.params[2].abs() < 1e-4, "{f:?}");
        assert!(f.r_squared > 0.9999);
    }

    #[test]
    fn noisy_exponential_high_r2() {
        let x = grid(0.0, 3.0, 100);
        let y = eval_model(ModelKind::Exponential, &[2.0, 0.5, 0.0], &x).unwrap();
        let mut rng = crate::rng::rng_from(42);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let yn: Vec<f64> = y.iter().map(|v| v * (1.0 + noise.sample(&mut rng))).collect();
        let f = fit(ModelKind::Exponential, &x, &yn, None).unwrap();
        assert!(f.r_squared > 0.99, "{f:?}");
    }

    #[test]
    fn starting_at_optimum_stops_immediately() {
        let x = grid(0.1, 4.0, 40);
        let p = [30.0, 2.5, 1.2, 25.0];
        let y = eval_model(ModelKind::FourPl, &p, &x).unwrap();
        let f = fit(ModelKind::FourPl, &x, &y, Some(&p)).unwrap();
        assert!(f.iterations <= 2 && f.converged, "{f:?}");
        assert!(f.residual_norm < 1e-9);
    }

    #[test]
    fn fixed_parameter_is_respected() {
        let x = grid(0.0, 3.0, 60);
        let y = eval_model(ModelKind::Exponential, &[1.5, 1.2, 0.0], &x).unwrap();
        let f = fit_with(
            ModelKind::Exponential,
            &x,
            &y,
            None,
            &[None, None, Some(0.0)],
            &FitConfig::default(),
        )
        .unwrap();
        assert_eq!(f.params[2], 0.0);
        assert!((f.params[0] - 1.5).abs() < 1e-6 && (f.params[1] - 1.2).abs() < 1e-6, "{f:?}");
    }

    #[test]
    fn constant_target_flags_r2() {
        let x = grid(0.0, 1.0, 10);
        let f = fit(ModelKind::Exponential, &x, &[0.0; 10], None).unwrap();
        assert!(!f.r_squared_defined);
        assert_eq!(f.r_squared, 0.0);
        assert!(f.params[0].abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_input() {
        assert!(fit(ModelKind::Logistic, &[0.0, 1.0, 2.0, f64::NAN], &[0.0; 4], None).is_err());
    }
}
