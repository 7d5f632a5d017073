use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric curve families.
///
/// * `Exponential`: `y = a(1 - e^(-bx)) + c`
/// * `Logistic`: `y = a / (1 + e^(-b(x - c)))`
/// * `PowerLaw`: `y = a·x^b + c` (x > 0)
/// * `FourPL`: `y = d + (a - d) / (1 + (x/c)^b)` (x > 0, c > 0)
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Exponential,
    Logistic,
    PowerLaw,
    FourPl,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Exponential,
        ModelKind::Logistic,
        ModelKind::PowerLaw,
        ModelKind::FourPl,
    ];

    pub fn n_params(self) -> usize {
        match self {
            ModelKind::FourPl => 4,
            _ => 3,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::FourPl => &["a", "b", "c", "d"],
            _ => &["a", "b", "c"],
        }
    }

    pub fn requires_positive_x(self) -> bool {
        matches!(self, ModelKind::PowerLaw | ModelKind::FourPl)
    }

    /// Evaluate at a single point without domain checks.
    pub(crate) fn eval_point(self, p: &[f64], x: f64) -> f64 {
        match self {
            ModelKind::Exponential => p[0] * (1.0 - (-p[1] * x).exp()) + p[2],
            ModelKind::Logistic => p[0] / (1.0 + (-p[1] * (x - p[2])).exp()),
            ModelKind::PowerLaw => p[0] * x.powf(p[1]) + p[2],
            ModelKind::FourPl => p[3] + (p[0] - p[3]) / (1.0 + (x / p[2]).powf(p[1])),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Exponential => "exponential",
            ModelKind::Logistic => "logistic",
            ModelKind::PowerLaw => "power_law",
            ModelKind::FourPl => "four_pl",
        };
        f.write_str(s)
    }
}

pub fn eval_model(kind: ModelKind, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if params.len() != kind.n_params() {
        return Err(Error::invalid(format!(
            "{kind} takes {} parameters, got {}",
            kind.n_params(),
            params.len()
        )));
    }
    if kind == ModelKind::FourPl && !(params[2] > 0.0) {
        return Err(Error::invalid("four_pl inflection c must be positive"));
    }
    x.iter()
        .map(|&xi| {
            if kind.requires_positive_x() && !(xi > 0.0) {
                return Err(Error::invalid(format!("{kind} requires x > 0, got {xi}")));
            }
            let y = kind.eval_point(params, xi);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::invalid(format!("{kind} is not finite at x = {xi}")))
            }
        })
        .collect()
}

/// Sort points by `(x, y)`; fitting works on this canonical order.
pub(crate) fn sorted_points(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    (idx.iter().map(|&i| x[i]).collect(), idx.iter().map(|&i| y[i]).collect())
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)))
}

/// Exponents scanned by [`power_law_start`].
const POWER_SCAN: (f64, f64, usize) = (-3.0, 3.0, 301);

/// Power-law start `[a, b, c]`. For fixed b the model is linear in a and c,
/// so scan b, solve (a, c) by least squares and keep the best.
fn power_law_start(x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let (lo, hi, steps) = POWER_SCAN;
    let n = x.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..steps {
        let b = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        if b.abs() < 1e-9 {
            continue;
        }
        let u: Vec<f64> = x.iter().map(|xi| xi.powf(b)).collect();
        if u.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mu = u.iter().sum::<f64>() / n;
        let suu: f64 = u.iter().map(|v| (v - mu).powi(2)).sum();
        if suu <= 0.0 {
            continue;
        }
        let a = u.iter().zip(y).map(|(v, w)| (v - mu) * (w - my)).sum::<f64>() / suu;
        let c = my - a * mu;
        let sse: f64 = u.iter().zip(y).map(|(v, w)| (w - a * v - c).powi(2)).sum();
        if best.as_ref().is_none_or(|(s, _)| sse < *s) {
            best = Some((sse, vec![a, b, c]));
        }
    }
    best.map(|(_, p)| p)
}

/// First x at which y crosses the midpoint of its range (linear interpolation).
fn mid_crossing(x: &[f64], y: &[f64]) -> f64 {
    let (lo, hi) = range(y);
    let mid = 0.5 * (lo + hi);
    for i in 1..x.len() {
        let (y0, y1) = (y[i - 1] - mid, y[i] - mid);
        if y0 == 0.0 {
            return x[i - 1];
        }
        if y0.signum() != y1.signum() {
            let t = y0 / (y0 - y1);
            return x[i - 1] + t * (x[i] - x[i - 1]);
        }
    }
    0.5 * (x[0] + x[x.len() - 1])
}

/// Heuristic starting point from the data, in `(x, y)`-sorted order.
///
/// The logistic has no offset, so the curve runs between 0 and `a`. Its
/// sign follows the data level and `b` is positive when `|y|` grows with `x`.
pub fn default_init(kind: ModelKind, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if x.len() < kind.n_params() + 1 {
        return Err(Error::invalid(format!(
            "{kind} needs at least {} points, got {}",
            kind.n_params() + 1,
            x.len()
        )));
    }
    let (x, y) = sorted_points(x, y);
    let (xlo, xhi) = range(&x);
    let (ylo, yhi) = range(&y);
    let xr = (xhi - xlo).max(f64::EPSILON);
    let yr = yhi - ylo;
    let n = y.len();
    let trend = (y[n - 1] - y[0]).signum();
    let trend = if trend == 0.0 { 1.0 } else { trend };
    Ok(match kind {
        ModelKind::Exponential => vec![trend * yr, 1.0 / xr, y[0]],
        ModelKind::Logistic => {
            let mean = y.iter().sum::<f64>() / n as f64;
            let a = if mean >= 0.0 { yr } else { -yr };
            let grows = trend * a.signum() > 0.0;
            let b = if grows { 4.0 / xr } else { -4.0 / xr };
            vec![a, b, mid_crossing(&x, &y)]
        }
        ModelKind::PowerLaw => power_law_start(&x, &y).unwrap_or_else(|| vec![trend * yr, 1.0, ylo]),
        ModelKind::FourPl => {
            let c = mid_crossing(&x, &y).max(xlo.max(f64::MIN_POSITIVE));
            vec![y[0], 2.0, c, y[n - 1]]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_at_zero() {
        assert_eq!(eval_model(ModelKind::Exponential, &[1.0, 1.0, 0.0], &[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn logistic_midpoint() {
        for b in [-3.0, 0.1, 7.0] {
            let y = eval_model(ModelKind::Logistic, &[2.0, b, 1.5], &[1.5]).unwrap();
            assert_eq!(y, vec![1.0]);
        }
    }

    #[test]
    fn four_pl_upper_asymptote() {
        let y = eval_model(ModelKind::FourPl, &[30.0, 2.0, 1.0, 25.0], &[1e6]).unwrap();
        assert!((y[0] - 25.0).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(eval_model(ModelKind::FourPl, &[30.0, 2.0, 1.0, 25.0], &[0.0]).is_err());
        assert!(eval_model(ModelKind::PowerLaw, &[1.0, 0.5, 0.0], &[-1.0]).is_err());
        assert!(eval_model(ModelKind::Logistic, &[1.0, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn exponential_init_within_factor_ten() {
        let truth = [2.0, 0.5, 0.3];
        let x: Vec<f64> = (0..100).map(|i| 3.0 * i as f64 / 99.0).collect();
        let y = eval_model(ModelKind::Exponential, &truth, &x).unwrap();
        let init = default_init(ModelKind::Exponential, &x, &y).unwrap();
        for (p, t) in init.iter().zip(&truth) {
            let r = p / t;
            assert!((0.1..=10.0).contains(&r), "{init:?}");
        }
    }

    #[test]
    fn decreasing_logistic_init_has_negative_b() {
        let x: Vec<f64> = (0..60).map(|i| i as f64 * 0.1).collect();
        let y = eval_model(ModelKind::Logistic, &[2.0, -3.0, 3.0], &x).unwrap();
        let init = default_init(ModelKind::Logistic, &x, &y).unwrap();
        assert!(init[1] < 0.0, "{init:?}");
    }

    #[test]
    fn four_pl_needs_five_points() {
        assert!(default_init(ModelKind::FourPl, &[1.0, 2.0], &[3.0, 4.0]).is_err());
    }
}
