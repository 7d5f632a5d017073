use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::child_rng;

/// Tree node in a flat array; children are indices into the same array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Class probabilities (classification) or a single mean (regression).
    Leaf { value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// Unnormalized impurity decrease per feature.
    pub importance: Vec<f64>,
}

impl Tree {
    pub fn leaf_value(&self, row: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { value } => return value,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Task {
    /// Labels are compact class indices `< n_classes`.
    Classify { n_classes: usize },
    Regress,
}

pub(crate) struct TreeParams {
    pub max_features: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

fn impurity(task: Task, y: &[f64], idx: &[usize]) -> f64 {
    let n = idx.len() as f64;
    match task {
        Task::Classify { n_classes } => {
            let mut counts = vec![0.0; n_classes];
            for &i in idx {
                counts[y[i] as usize] += 1.0;
            }
            1.0 - counts.iter().map(|c| (c / n).powi(2)).sum::<f64>()
        }
        Task::Regress => {
            let m = idx.iter().map(|&i| y[i]).sum::<f64>() / n;
            idx.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>() / n
        }
    }
}

fn leaf(task: Task, y: &[f64], idx: &[usize]) -> Node {
    let n = idx.len() as f64;
    let value = match task {
        Task::Classify { n_classes } => {
            let mut p = vec![0.0; n_classes];
            for &i in idx {
                p[y[i] as usize] += 1.0 / n;
            }
            p
        }
        Task::Regress => vec![idx.iter().map(|&i| y[i]).sum::<f64>() / n],
    };
    Node::Leaf { value }
}

/// Incremental split statistics scanned left to right over sorted samples.
enum Scan {
    Classify { left: Vec<f64>, right: Vec<f64> },
    Regress { sl: f64, sl2: f64, sr: f64, sr2: f64 },
}

impl Scan {
    fn new(task: Task, y: &[f64], idx: &[usize]) -> Self {
        match task {
            Task::Classify { n_classes } => {
                let mut right = vec![0.0; n_classes];
                for &i in idx {
                    right[y[i] as usize] += 1.0;
                }
                Scan::Classify { left: vec![0.0; n_classes], right }
            }
            Task::Regress => {
                let sr = idx.iter().map(|&i| y[i]).sum();
                let sr2 = idx.iter().map(|&i| y[i] * y[i]).sum();
                Scan::Regress { sl: 0.0, sl2: 0.0, sr, sr2 }
            }
        }
    }

    fn shift(&mut self, v: f64) {
        match self {
            Scan::Classify { left, right } => {
                left[v as usize] += 1.0;
                right[v as usize] -= 1.0;
            }
            Scan::Regress { sl, sl2, sr, sr2 } => {
                *sl += v;
                *sl2 += v * v;
                *sr -= v;
                *sr2 -= v * v;
            }
        }
    }

    /// Weighted child impurity `n_l·I_l + n_r·I_r`.
    fn children(&self, nl: f64, nr: f64) -> f64 {
        match self {
            Scan::Classify { left, right } => {
                let gini = |c: &[f64], n: f64| n - c.iter().map(|v| v * v).sum::<f64>() / n;
                gini(left, nl) + gini(right, nr)
            }
            Scan::Regress { sl, sl2, sr, sr2 } => {
                (sl2 - sl * sl / nl).max(0.0) + (sr2 - sr * sr / nr).max(0.0)
            }
        }
    }
}

/// Grow one CART tree on the bootstrap sample `idx`.
pub(crate) fn grow(
    x: &[Vec<f64>],
    y: &[f64],
    task: Task,
    idx: Vec<usize>,
    params: &TreeParams,
    rng: &mut crate::rng::Rng,
) -> Tree {
    let p = x[0].len();
    let mut tree = Tree { nodes: Vec::new(), importance: vec![0.0; p] };
    let mut stack = vec![(idx, 0usize, usize::MAX, false)];
    let mut order: Vec<usize> = (0..p).collect();
    while let Some((idx, depth, parent, is_right)) = stack.pop() {
        let me = tree.nodes.len();
        if parent != usize::MAX {
            if let Node::Split { left, right, .. } = &mut tree.nodes[parent] {
                if is_right { *right = me } else { *left = me }
            }
        }
        let n = idx.len();
        let imp = impurity(task, y, &idx);
        let depth_ok = params.max_depth.is_none_or(|d| depth < d);
        let split = if imp > 1e-15 && n >= 2 * params.min_leaf && depth_ok {
            best_split(x, y, task, &idx, params, &mut order, rng)
        } else {
            None
        };
        match split {
            Some((feature, threshold, child_weighted)) => {
                tree.importance[feature] += n as f64 * imp - child_weighted;
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][feature] <= threshold);
                tree.nodes.push(Node::Split { feature, threshold, left: 0, right: 0 });
                // Push right first so the left subtree is numbered first.
                stack.push((r, depth + 1, me, true));
                stack.push((l, depth + 1, me, false));
            }
            None => tree.nodes.push(leaf(task, y, &idx)),
        }
    }
    tree
}

/// Visit features in a random order until `max_features` non-constant ones
/// have been scanned; keep the first strictly best threshold encountered.
fn best_split(
    x: &[Vec<f64>],
    y: &[f64],
    task: Task,
    idx: &[usize],
    params: &TreeParams,
    order: &mut [usize],
    rng: &mut crate::rng::Rng,
) -> Option<(usize, f64, f64)> {
    order.sort_unstable();
    order.shuffle(rng);
    let mut best: Option<(usize, f64, f64)> = None;
    let mut visited = 0;
    let mut sorted = idx.to_vec();
    let min_leaf = params.min_leaf;
    for &f in order.iter() {
        if visited == params.max_features {
            break;
        }
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let lo = x[sorted[0]][f];
        let hi = x[sorted[sorted.len() - 1]][f];
        if lo == hi {
            continue;
        }
        visited += 1;
        let mut scan = Scan::new(task, y, &sorted);
        let n = sorted.len();
        for k in 0..n - 1 {
            scan.shift(y[sorted[k]]);
            let (a, b) = (x[sorted[k]][f], x[sorted[k + 1]][f]);
            let nl = k + 1;
            if a == b || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let w = scan.children(nl as f64, (n - nl) as f64);
            if best.is_none_or(|(_, _, bw)| w < bw) {
                let mut t = a + (b - a) / 2.0;
                if t >= b {
                    t = a;
                }
                best = Some((f, t, w));
            }
        }
    }
    best
}

/// Grow `n_trees` bootstrapped trees; tree `t` uses `child_rng(seed, t)` so
/// the forest does not depend on scheduling.
pub(crate) fn grow_forest(
    x: &[Vec<f64>],
    y: &[f64],
    task: Task,
    n_trees: usize,
    params: &TreeParams,
    seed: u64,
) -> Vec<Tree> {
    let n = x.len();
    (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = child_rng(seed, t as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow(x, y, task, idx, params, &mut rng)
        })
        .collect()
}

/// Mean decrease in impurity: per-tree normalized, averaged over trees that
/// split at least once, normalized again.
pub(crate) fn mdi(trees: &[Tree], p: usize) -> Vec<f64> {
    let mut acc = vec![0.0; p];
    let mut used = 0;
    for t in trees {
        let s: f64 = t.importance.iter().sum();
        if s > 0.0 {
            used += 1;
            for (a, v) in acc.iter_mut().zip(&t.importance) {
                *a += v / s;
            }
        }
    }
    let total: f64 = acc.iter().sum();
    if used == 0 || total <= 0.0 {
        return vec![0.0; p];
    }
    acc.iter().map(|a| a / total).collect()
}
