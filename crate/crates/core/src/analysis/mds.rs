use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::{check_finite, fix_sign, sorted_eigen};
use crate::dataio::{AdjectivePair, RatingMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsResult {
    /// m rows of k coordinates, column-centered.
    pub coords: Vec<Vec<f64>>,
    /// Full eigen-spectrum of the double-centered matrix, descending and
    /// unclamped; negative entries measure non-Euclidean distortion.
    pub eigenvalues: Vec<f64>,
}

/// Classical (Torgerson) scaling of a distance matrix into `k` dimensions.
pub fn classical_mds(dist: &[Vec<f64>], k: usize) -> Result<MdsResult> {
    let m = dist.len();
    if m == 0 || dist.iter().any(|r| r.len() != m) {
        return Err(Error::invalid("distance matrix must be square and non-empty"));
    }
    if k == 0 || k > m {
        return Err(Error::invalid(format!("MDS dimension {k} outside 1..={m}")));
    }
    check_finite(dist, "distance matrix")?;
    let scale = dist.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    for i in 0..m {
        if dist[i][i].abs() > 1e-12 * scale {
            return Err(Error::invalid(format!("distance matrix diagonal entry {i} is not zero")));
        }
        for j in 0..m {
            if dist[i][j] < 0.0 {
                return Err(Error::invalid(format!("negative distance at ({i}, {j})")));
            }
            if (dist[i][j] - dist[j][i]).abs() > 1e-9 * scale {
                return Err(Error::invalid(format!("distance matrix is asymmetric at ({i}, {j})")));
            }
        }
    }

    let d2 = DMatrix::from_fn(m, m, |i, j| dist[i][j].powi(2));
    let row_mean: Vec<f64> = (0..m).map(|i| d2.row(i).sum() / m as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / m as f64;
    // −½ J D² J written out; D² is symmetric so column means equal row means.
    let b = DMatrix::from_fn(m, m, |i, j| -0.5 * (d2[(i, j)] - row_mean[i] - row_mean[j] + grand));
    let b = (&b + b.transpose()) * 0.5;
    let (eigenvalues, vectors) = sorted_eigen(b);

    let mut cols: Vec<Vec<f64>> = vectors
        .iter()
        .zip(&eigenvalues)
        .take(k)
        .map(|(v, &l)| {
            let s = l.max(0.0).sqrt();
            let mut c: Vec<f64> = v.iter().map(|x| x * s).collect();
            fix_sign(&mut c);
            c
        })
        .collect();
    // Remove rounding residue so the centering invariant holds tightly.
    for c in &mut cols {
        let mu = c.iter().sum::<f64>() / m as f64;
        c.iter_mut().for_each(|x| *x -= mu);
    }
    let coords = (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    Ok(MdsResult { coords, eigenvalues })
}

/// Pairwise Euclidean distances between rows.
pub fn euclidean_distances(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let Some(p) = rows.first().map(Vec::len) else {
        return Err(Error::invalid("no vectors to compare"));
    };
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::invalid("vectors have unequal lengths"));
    }
    Ok(rows
        .iter()
        .map(|a| {
            rows.iter()
                .map(|b| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub ids: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

/// Distances between participants' normalized rating vectors for one pair.
pub fn participant_distance(ratings: &RatingMatrix, pair: AdjectivePair) -> Result<DistanceMatrix> {
    let ids: Vec<String> = ratings.per_participant.keys().cloned().collect();
    if ids.is_empty() {
        return Err(Error::Ratings("no participant rating vectors".into()));
    }
    let rows = ids
        .iter()
        .map(|id| {
            ratings
                .participant_column(id, pair)
                .ok_or_else(|| Error::Ratings(format!("participant {id} has no {pair} vector")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceMatrix { dist: euclidean_distances(&rows)?, ids })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn points(m: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rng_from(seed);
        (0..m).map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect()).collect()
    }

    fn max_dist_error(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        a.iter().flatten().zip(b.iter().flatten()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn colinear_points() {
        let d = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let r = classical_mds(&d, 2).unwrap();
        assert!(max_dist_error(&euclidean_distances(&r.coords).unwrap(), &d) < 1e-9);
    }

    #[test]
    fn zero_distances_at_origin() {
        let r = classical_mds(&vec![vec![0.0; 4]; 4], 2).unwrap();
        assert!(r.coords.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn random_plane_round_trip() {
        let d = euclidean_distances(&points(12, 2, 3)).unwrap();
        let r = classical_mds(&d, 2).unwrap();
        assert!(max_dist_error(&euclidean_distances(&r.coords).unwrap(), &d) < 1e-6);
        for j in 0..2 {
            assert!(r.coords.iter().map(|c| c[j]).sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(classical_mds(&[vec![0.0, 1.0], vec![2.0, 0.0]], 1).is_err());
        assert!(classical_mds(&[vec![0.0, -1.0], vec![-1.0, 0.0]], 1).is_err());
        assert!(classical_mds(&[vec![1.0, 1.0], vec![1.0, 0.0]], 1).is_err());
        assert!(classical_mds(&[vec![0.0]], 2).is_err());
    }

    #[test]
    fn distance_definitions() {
        let d = euclidean_distances(&[vec![0.2, 0.4], vec![0.2, 0.4], vec![1.2, 0.4]]).unwrap();
        assert_eq!(d[0][1], 0.0);
        assert!((d[0][2] - 1.0).abs() < 1e-15);
        let rows = points(5, 50, 11);
        let d = euclidean_distances(&rows).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let mut s = 0.0;
                for t in 0..50 {
                    s += (rows[i][t] - rows[j][t]) * (rows[i][t] - rows[j][t]);
                }
                assert!((d[i][j] - s.sqrt()).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn embeds_low_dimensional_points(seed in any::<u64>(), dim in 1usize..4, m in 4usize..15) {
            let d = euclidean_distances(&points(m, dim, seed)).unwrap();
            let r = classical_mds(&d, dim.max(2).min(m)).unwrap();
            prop_assert!(max_dist_error(&euclidean_distances(&r.coords).unwrap(), &d) < 1e-6);
        }
    }
}
