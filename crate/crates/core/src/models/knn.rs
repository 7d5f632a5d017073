/// Majority vote among the `k` nearest rows (Euclidean, ties in distance
/// broken by row order). A tied vote goes to the tied class whose member is
/// nearest.
pub(crate) fn knn_vote(train: &[Vec<f64>], labels: &[usize], k: usize, row: &[f64], n_classes: usize) -> usize {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, t)| (t.iter().zip(row).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; n_classes];
    for &(_, i) in &d[..k] {
        votes[labels[i]] += 1;
    }
    let top = *votes.iter().max().expect("non-empty");
    d[..k]
        .iter()
        .map(|&(_, i)| labels[i])
        .find(|&c| votes[c] == top)
        .expect("a voter holds the top count")
}
