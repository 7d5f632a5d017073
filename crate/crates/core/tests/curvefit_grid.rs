use std::time::Instant;

use tactile_core::curvefit::{fit, ModelKind};
use tactile_core::synth::{gen_curve, recovery_grid};

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-9)
}

#[test]
fn recovery_grid_noiseless_and_noisy() {
    let start = Instant::now();
    for kind in ModelKind::ALL {
        let grid = recovery_grid(kind);
        assert!(grid.len() >= 25);
        for (i, truth) in grid.iter().enumerate() {
            let (x, y) = gen_curve(kind, truth, 100, 0.0, 0).unwrap();
            let r = fit(kind, &x, &y, None).unwrap();
            for (g, w) in r.params.iter().zip(truth) {
                assert!(rel_err(*g, *w) < 1e-3, "{kind} #{i}: {truth:?} -> {:?}", r.params);
            }
            assert!(r.r_squared >= 0.9999, "{kind} #{i}: R² {}", r.r_squared);

            let (x, y) = gen_curve(kind, truth, 100, 0.01, i as u64 + 1).unwrap();
            let r = fit(kind, &x, &y, None).unwrap();
            assert!(r.r_squared >= 0.99, "{kind} #{i} noisy: R² {}", r.r_squared);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
}
