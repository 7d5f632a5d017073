//! Fit each response model to a noisy synthetic curve.

use tactile_core::curvefit::{fit, ModelKind};
use tactile_core::synth::{gen_curve, recovery_grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in ModelKind::ALL {
        let truth = &recovery_grid(kind)[12];
        let (x, y) = gen_curve(kind, truth, 200, 0.02, 5)?;
        let r = fit(kind, &x, &y, None)?;
        println!(
            "{:<12} truth {truth:.3?}\n{:<12} fit   {:.3?}  R² {:.4}  ({} iterations)",
            kind.to_string(),
            "", r.params, r.r_squared, r.iterations
        );
    }
    Ok(())
}
