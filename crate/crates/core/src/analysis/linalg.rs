use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue, with
/// each eigenvector's largest-magnitude entry made positive.
pub(super) fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            fix_sign(&mut v);
            v
        })
        .collect();
    (values, vectors)
}

/// Flip `v` so its largest-magnitude entry (first on ties) is positive.
pub(super) fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

pub(super) fn check_finite(x: &[Vec<f64>], what: &str) -> crate::Result<()> {
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(crate::Error::invalid(format!("{what} contains non-finite values")));
    }
    Ok(())
}
