//! Variance-impurity regression tree (CART).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub mtry: usize,
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
    /// Number of sorted samples going left.
    n_left: usize,
}

/// Grow a tree on `samples` (row indices, repeats allowed). `cols` is column-major.
/// Returns the tree and the per-feature summed impurity decrease.
pub(crate) fn grow(
    cols: &[Vec<f64>],
    y: &[f64],
    mut samples: Vec<usize>,
    p: &GrowParams,
    rng: &mut ChaCha8Rng,
) -> (Tree, Vec<f64>) {
    let n_features = cols.len();
    let mut importance = vec![0.0; n_features];
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    // (node slot, range start, range end, depth)
    let mut stack = vec![(0usize, 0usize, samples.len(), 0usize)];
    let mut feats: Vec<usize> = (0..n_features).collect();
    let mut buf: Vec<(f64, f64, usize)> = Vec::with_capacity(samples.len());

    while let Some((slot, lo, hi, depth)) = stack.pop() {
        let idx = &mut samples[lo..hi];
        let m = idx.len();
        let sum: f64 = idx.iter().map(|&i| y[i]).sum();
        let mean = sum / m as f64;
        let sse: f64 = idx.iter().map(|&i| (y[i] - mean).powi(2)).sum();
        let can_split = m >= 2 * p.min_samples_leaf
            && p.max_depth.is_none_or(|d| depth < d)
            && sse > 1e-12 * m as f64;
        let best = if can_split {
            best_split(cols, y, idx, p, &mut feats, &mut buf, rng, sum)
        } else {
            None
        };
        let Some(best) = best else {
            nodes[slot] = Node::Leaf { value: mean };
            continue;
        };
        importance[best.feature] += best.gain;
        // Reorder the range so the left child occupies the first n_left slots.
        let col = &cols[best.feature];
        idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        debug_assert!(
            col[idx[best.n_left - 1]] <= best.threshold && col[idx[best.n_left]] > best.threshold
        );
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        let mid = lo + best.n_left;
        stack.push((right, mid, hi, depth + 1));
        stack.push((left, lo, mid, depth + 1));
    }
    (Tree { nodes }, importance)
}

#[allow(clippy::too_many_arguments)]
fn best_split(
    cols: &[Vec<f64>],
    y: &[f64],
    idx: &[usize],
    p: &GrowParams,
    feats: &mut [usize],
    buf: &mut Vec<(f64, f64, usize)>,
    rng: &mut ChaCha8Rng,
    total: f64,
) -> Option<Best> {
    let m = idx.len();
    let n_features = feats.len();
    let mtry = p.mtry.clamp(1, n_features);
    // Partial Fisher-Yates: the first `mtry` entries become the candidates.
    for i in 0..mtry {
        let j = rng.random_range(i..n_features);
        feats.swap(i, j);
    }
    let parent = total * total / m as f64;
    let mut best: Option<Best> = None;
    for &f in &feats[..mtry] {
        let col = &cols[f];
        buf.clear();
        buf.extend(idx.iter().map(|&i| (col[i], y[i], i)));
        buf.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        if buf[0].0 == buf[m - 1].0 {
            continue;
        }
        let mut left_sum = 0.0;
        for k in 0..m - 1 {
            left_sum += buf[k].1;
            let n_left = k + 1;
            if buf[k].0 == buf[k + 1].0
                || n_left < p.min_samples_leaf
                || m - n_left < p.min_samples_leaf
            {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64
                + right_sum * right_sum / (m - n_left) as f64
                - parent;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                let (a, b) = (buf[k].0, buf[k + 1].0);
                let mut threshold = a + (b - a) / 2.0;
                if !(a < threshold && threshold < b) {
                    threshold = a;
                }
                best = Some(Best {
                    feature: f,
                    threshold,
                    gain,
                    n_left,
                });
            }
        }
    }
    best
}
