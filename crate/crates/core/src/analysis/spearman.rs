use serde::{Deserialize, Serialize};

use super::linalg::check_finite;
use crate::error::{Error, Result};

/// 1-based ranks with ties given their average rank.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation, or `None` when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    (saa > 0.0 && sbb > 0.0).then(|| (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&mid_ranks(a), &mid_ranks(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub matrix: Vec<Vec<f64>>,
    /// Columns whose correlations were undefined and reported as 0.
    pub constant_columns: Vec<usize>,
}

/// Spearman correlation between every pair of columns of `rows`.
pub fn spearman_matrix(rows: &[Vec<f64>]) -> Result<SpearmanResult> {
    if rows.len() < 3 {
        return Err(Error::invalid("Spearman correlation needs at least 3 rows"));
    }
    let p = rows[0].len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::invalid("rows have unequal lengths"));
    }
    check_finite(rows, "Spearman input")?;
    let ranks: Vec<Vec<f64>> = (0..p)
        .map(|j| mid_ranks(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    let constant_columns = (0..p).filter(|&j| ranks[j].iter().all(|&r| r == ranks[j][0])).collect();
    let matrix = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| if i == j { 1.0 } else { pearson(&ranks[i], &ranks[j]).unwrap_or(0.0) })
                .collect()
        })
        .collect();
    Ok(SpearmanResult { matrix, constant_columns })
}
