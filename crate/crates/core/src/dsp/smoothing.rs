use crate::error::{Error, Result};

/// Centered moving average; windows are truncated at the edges.
pub fn moving_average(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::invalid(format!("moving_average window must be odd, got {window}")));
    }
    if window > x.len() {
        return Err(Error::invalid(format!(
            "moving_average window {window} exceeds signal length {}",
            x.len()
        )));
    }
    let half = window / 2;
    let n = x.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect())
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Sliding k-point median absolute deviation, `median(|A_i - median(A)|)`.
///
/// Odd `k` centers the window on the sample; even `k` takes `k/2` samples
/// before and `k/2 - 1` after. Windows are truncated at the edges.
pub fn moving_mad(x: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("moving_mad window k must be positive"));
    }
    if k > x.len() {
        return Err(Error::invalid(format!(
            "moving_mad window {k} exceeds signal length {}",
            x.len()
        )));
    }
    let before = k / 2;
    let after = k - 1 - before;
    let n = x.len();
    let mut buf = Vec::with_capacity(k);
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after + 1).min(n);
            buf.clear();
            buf.extend_from_slice(&x[lo..hi]);
            let med = median(&mut buf);
            for v in buf.iter_mut() {
                *v = (*v - med).abs();
            }
            median(&mut buf)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn average_preserves_constants() {
        assert_eq!(moving_average(&[3.0; 5], 3).unwrap(), vec![3.0; 5]);
    }

    #[test]
    fn average_hand_computed() {
        let y = moving_average(&[0.0, 0.0, 3.0, 0.0, 0.0], 3).unwrap();
        assert_eq!(y, vec![0.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn average_reduces_white_noise_variance() {
        let mut rng = crate::rng::rng_from(3);
        let x: Vec<f64> = (0..5000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = moving_average(&x, 101).unwrap();
        let var = |v: &[f64]| {
            let m = super::super::mean(v);
            v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        assert!(var(&y) < var(&x));
    }

    #[test]
    fn average_rejects_bad_windows() {
        assert!(moving_average(&[1.0; 5], 4).is_err());
        assert!(moving_average(&[1.0; 5], 7).is_err());
    }

    #[test]
    fn mad_constant_and_singleton() {
        assert!(moving_mad(&[2.5; 9], 4).unwrap().iter().all(|&v| v == 0.0));
        let x = [1.0, 5.0, -3.0, 8.0];
        assert!(moving_mad(&x, 1).unwrap().iter().all(|&v| v == 0.0));
        assert!(moving_mad(&x, 0).is_err());
    }

    #[test]
    fn mad_spike_matches_brute_force() {
        let x = [0.0, 0.0, 0.0, 10.0, 0.0, 0.0, 0.0];
        let got = moving_mad(&x, 3).unwrap();
        // Brute force: every 3-window around i, truncated at edges.
        let brute: Vec<f64> = (0..x.len())
            .map(|i| {
                let lo = i.saturating_sub(1);
                let hi = (i + 2).min(x.len());
                let mut w: Vec<f64> = x[lo..hi].to_vec();
                w.sort_by(f64::total_cmp);
                let med = if w.len() % 2 == 1 { w[w.len() / 2] } else { (w[0] + w[1]) / 2.0 };
                let mut d: Vec<f64> = w.iter().map(|v| (v - med).abs()).collect();
                d.sort_by(f64::total_cmp);
                if d.len() % 2 == 1 { d[d.len() / 2] } else { (d[0] + d[1]) / 2.0 }
            })
            .collect();
        assert_eq!(got, brute);
        // A lone spike never holds a window majority, so k=3 MAD stays zero;
        // a step does register once the window straddles it evenly.
        assert!(got.iter().all(|&v| v == 0.0));
        let step = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0, 10.0];
        let mad = moving_mad(&step, 4).unwrap();
        let peak = mad
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        assert!((2..=4).contains(&peak), "peak at {peak}: {mad:?}");
        assert_eq!(mad[peak], 5.0);
    }

    proptest! {
        #[test]
        fn mad_is_nonnegative(x in proptest::collection::vec(-1e3f64..1e3, 1..80), k in 1usize..20) {
            let k = k.min(x.len());
            prop_assert!(moving_mad(&x, k).unwrap().iter().all(|&v| v >= 0.0));
        }
    }
}
