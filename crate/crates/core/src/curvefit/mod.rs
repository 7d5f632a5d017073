//! Levenberg–Marquardt curve fitting for the four parametric signal models.

mod lm;
mod model;

pub use lm::{fit, fit_with, FitConfig, FitResult};
pub use model::{default_init, eval_model, ModelKind};

use crate::error::{Error, Result};

/// Coefficient of determination `1 - SS_res / SS_tot`.
///
/// Constant `y` makes `SS_tot` zero; that case is an error so callers can
/// flag it rather than divide by zero.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() || y.len() < 2 {
        return Err(Error::invalid(format!(
            "r_squared needs equal lengths >= 2 (got {} and {})",
            y.len(),
            yhat.len()
        )));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::invalid("r_squared undefined for constant target"));
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}
