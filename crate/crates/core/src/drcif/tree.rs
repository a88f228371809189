//! Entropy CART over a dense, column-major feature matrix.

use serde::{Deserialize, Serialize};

/// Gains closer than this are treated as equal, so that ties resolve by
/// feature/threshold order rather than by rounding noise.
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class_counts: Vec<usize>,
    },
}

/// Nodes in preorder; the root is `nodes[0]`. Samples with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Index of the leaf reached by a sample, reading features on demand.
    pub fn leaf_index(&self, mut feature: impl FnMut(usize) -> f64) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature: f,
                    threshold,
                    left,
                    right,
                } => at = if feature(*f) <= *threshold { *left } else { *right },
                Node::Leaf { .. } => return at,
            }
        }
    }

    /// Majority class of the leaf reached by a sample; ties go to the lowest
    /// class index.
    pub fn predict(&self, feature: impl FnMut(usize) -> f64) -> usize {
        match &self.nodes[self.leaf_index(feature)] {
            Node::Leaf { class_counts } => majority(class_counts),
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }

    /// Feature indices used by any split.
    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// A threshold strictly between `a < b` that never rounds up to `b`.
fn midpoint(a: f64, b: f64) -> f64 {
    let t = a + (b - a) * 0.5;
    if t < b && t >= a {
        t
    } else {
        a
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Fits a tree on `columns[feature][sample]` with labels `y` in
/// `0..n_classes`.
///
/// Splits maximize information gain over every midpoint between consecutive
/// distinct values; ties go to the lowest feature, then the lowest threshold.
/// When no split has positive gain but a threshold exists, the first one in
/// that order is taken, so that interactions that only pay off one level down
/// (XOR) are still learnable. Growth stops at pure nodes, single samples and
/// nodes whose features are all constant.
pub fn fit_tree(columns: &[Vec<f64>], y: &[usize], n_classes: usize) -> DecisionTree {
    assert!(!y.is_empty(), "fit_tree needs at least one sample");
    debug_assert!(columns.iter().all(|c| c.len() == y.len()));
    let mut nodes = Vec::new();
    let mut idx: Vec<usize> = (0..y.len()).collect();
    grow(columns, y, n_classes, &mut idx, &mut nodes);
    DecisionTree { nodes }
}

fn grow(columns: &[Vec<f64>], y: &[usize], n_classes: usize, idx: &mut [usize], nodes: &mut Vec<Node>) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &i in idx.iter() {
        counts[y[i]] += 1;
    }
    let at = nodes.len();
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || idx.len() < 2 {
        nodes.push(Node::Leaf { class_counts: counts });
        return at;
    }
    let Some(best) = best_split(columns, y, &counts, idx) else {
        nodes.push(Node::Leaf { class_counts: counts });
        return at;
    };
    // placeholder, patched once the children exist
    nodes.push(Node::Leaf {
        class_counts: Vec::new(),
    });
    let col = &columns[best.feature];
    let mut n_left = 0;
    for k in 0..idx.len() {
        if col[idx[k]] <= best.threshold {
            idx.swap(k, n_left);
            n_left += 1;
        }
    }
    let (l, r) = idx.split_at_mut(n_left);
    let left = grow(columns, y, n_classes, l, nodes);
    let right = grow(columns, y, n_classes, r, nodes);
    nodes[at] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left,
        right,
    };
    at
}

fn best_split(columns: &[Vec<f64>], y: &[usize], counts: &[usize], idx: &[usize]) -> Option<Candidate> {
    let n = idx.len();
    let parent = entropy(counts, n);
    let n_classes = counts.len();
    let mut best: Option<Candidate> = None;
    let mut first: Option<Candidate> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];
    for (feature, col) in columns.iter().enumerate() {
        pairs.clear();
        pairs.extend(idx.iter().map(|&i| (col[i], y[i])));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if pairs[0].0 == pairs[n - 1].0 {
            continue;
        }
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(counts);
        for k in 0..n - 1 {
            let (v, c) = pairs[k];
            left[c] += 1;
            right[c] -= 1;
            let next = pairs[k + 1].0;
            if v == next {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            let child = (nl as f64 * entropy(&left, nl) + nr as f64 * entropy(&right, nr)) / n as f64;
            let gain = parent - child;
            let threshold = midpoint(v, next);
            if first.is_none() {
                first = Some(Candidate {
                    feature,
                    threshold,
                    gain,
                });
            }
            if best.as_ref().is_none_or(|b| gain > b.gain + GAIN_EPS) {
                best = Some(Candidate {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    match best {
        Some(b) if b.gain > GAIN_EPS => Some(b),
        _ => first,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accuracy(t: &DecisionTree, rows: &[Vec<f64>], y: &[usize]) -> f64 {
        let ok = rows.iter().zip(y).filter(|(r, &c)| t.predict(|f| r[f]) == c).count();
        ok as f64 / y.len() as f64
    }

    fn transpose(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..rows[0].len())
            .map(|f| rows.iter().map(|r| r[f]).collect())
            .collect()
    }

    #[test]
    fn two_points() {
        let t = fit_tree(&[vec![0.0, 1.0]], &[0, 1], 2);
        assert_eq!(
            t.nodes[0],
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 2
            }
        );
        assert_eq!(
            t.nodes[1],
            Node::Leaf {
                class_counts: vec![1, 0]
            }
        );
        assert_eq!(
            t.nodes[2],
            Node::Leaf {
                class_counts: vec![0, 1]
            }
        );
    }

    #[test]
    fn pure_node_is_leaf() {
        let t = fit_tree(&[vec![0.0, 1.0, 2.0]], &[1, 1, 1], 2);
        assert_eq!(
            t.nodes,
            vec![Node::Leaf {
                class_counts: vec![0, 3]
            }]
        );
    }

    #[test]
    fn xor_needs_two_levels() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let t = fit_tree(&transpose(&rows), &y, 2);
        assert_eq!(t.depth(), 2);
        assert_eq!(accuracy(&t, &rows, &y), 1.0);
        // root has zero gain everywhere; the first candidate is feature 0
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 0.5));
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // both features separate perfectly
        let cols = vec![vec![0.0, 0.0, 1.0, 1.0], vec![5.0, 5.0, 7.0, 7.0]];
        let t = fit_tree(&cols, &[0, 0, 1, 1], 2);
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn constant_features_never_split() {
        let cols = vec![vec![3.0; 4], vec![3.0; 4]];
        let t = fit_tree(&cols, &[0, 1, 0, 1], 2);
        assert_eq!(
            t.nodes,
            vec![Node::Leaf {
                class_counts: vec![2, 2]
            }]
        );
        assert_eq!(t.predict(|_| 0.0), 0);
    }

    #[test]
    fn separable_single_feature_is_fit_exactly() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        let y: Vec<usize> = x.iter().map(|&v| usize::from(v > 1.3)).collect();
        let t = fit_tree(std::slice::from_ref(&x), &y, 2);
        let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
        assert_eq!(accuracy(&t, &rows, &y), 1.0);
        assert_eq!(t.nodes.len(), 3);
    }

    #[test]
    fn midpoint_of_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(t >= a && t < b);
    }

    #[test]
    fn majority_tie_goes_low() {
        assert_eq!(majority(&[2, 2, 1]), 0);
        assert_eq!(majority(&[0, 3, 3]), 1);
    }
}
