//! C4.5-style decision tree over numeric features.
//!
//! Splits are binary thresholds at midpoints between consecutive distinct
//! values. Each feature contributes its highest-gain threshold; among the
//! features whose gain reaches the average, the one with the best gain ratio
//! wins. Growth stops on pure nodes, or when `min_leaf` cannot be met on both
//! sides. Pessimistic error-based pruning then replaces every subtree whose
//! estimated errors are no better than a single leaf's (subtree raising is
//! not performed).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::Classifier;
use crate::corpus_io::Label;
use crate::error::{Error, Result};
use crate::features::Dataset;

const GAIN_EPSILON: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    /// Upper-confidence level for pruning error estimates.
    pub confidence: f64,
    pub min_leaf: usize,
    pub prune: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            confidence: 0.25,
            min_leaf: 2,
            prune: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub pos: usize,
    pub neg: usize,
}

impl ClassCounts {
    fn of(labels: &[Label], idx: &[usize]) -> Self {
        let pos = idx.iter().filter(|&&i| labels[i] == Label::Positive).count();
        ClassCounts {
            pos,
            neg: idx.len() - pos,
        }
    }

    pub fn total(&self) -> usize {
        self.pos + self.neg
    }

    /// Majority class; ties go to positive.
    pub fn majority(&self) -> Label {
        if self.pos >= self.neg {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn errors(&self) -> usize {
        self.pos.min(self.neg)
    }

    fn is_pure(&self) -> bool {
        self.pos == 0 || self.neg == 0
    }

    fn entropy(&self) -> f64 {
        entropy2(self.pos as f64, self.neg as f64)
    }
}

fn entropy2(a: f64, b: f64) -> f64 {
    let n = a + b;
    [a, b]
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        counts: ClassCounts,
    },
    /// Rows with `value <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        counts: ClassCounts,
    },
}

impl Node {
    pub fn counts(&self) -> ClassCounts {
        match self {
            Node::Leaf { counts } | Node::Split { counts, .. } => *counts,
        }
    }
}

/// Nodes live in an arena; index 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub input_width: usize,
    pub nodes: Vec<Node>,
}

impl TreeModel {
    pub fn leaf_for(&self, row: &[f64]) -> ClassCounts {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Score of a leaf: positive share minus one half.
pub fn leaf_score(counts: ClassCounts) -> f64 {
    counts.pos as f64 / counts.total().max(1) as f64 - 0.5
}

impl Classifier for TreeModel {
    fn input_width(&self) -> usize {
        self.input_width
    }

    fn decision(&self, row: &[f64]) -> f64 {
        leaf_score(self.leaf_for(row))
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    ratio: f64,
    split_info: f64,
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [Label],
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let counts = ClassCounts::of(self.labels, &idx);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        if counts.is_pure() || idx.len() < 2 * self.min_leaf {
            return slot;
        }
        let Some(best) = self.choose_split(&idx, counts) else {
            return slot;
        };
        let (lo, hi): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][best.feature] <= best.threshold);
        let left = self.grow(lo);
        let right = self.grow(hi);
        self.nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            counts,
        };
        slot
    }

    /// Per feature: the highest-gain threshold and the most balanced one.
    fn feature_candidates(&self, idx: &[usize], parent: ClassCounts, feature: usize) -> Option<(Candidate, Candidate)> {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| self.rows[a][feature].total_cmp(&self.rows[b][feature]));
        let n = order.len() as f64;
        let parent_h = parent.entropy();

        let mut best_gain: Option<Candidate> = None;
        let mut most_balanced: Option<Candidate> = None;
        let mut left = ClassCounts::default();
        for k in 0..order.len() - 1 {
            if self.labels[order[k]] == Label::Positive {
                left.pos += 1;
            } else {
                left.neg += 1;
            }
            let here = self.rows[order[k]][feature];
            let next = self.rows[order[k + 1]][feature];
            if here == next {
                continue;
            }
            let n_left = k + 1;
            let n_right = order.len() - n_left;
            if n_left < self.min_leaf || n_right < self.min_leaf {
                continue;
            }
            let right = ClassCounts {
                pos: parent.pos - left.pos,
                neg: parent.neg - left.neg,
            };
            let (wl, wr) = (n_left as f64 / n, n_right as f64 / n);
            let gain = parent_h - wl * left.entropy() - wr * right.entropy();
            let split_info = entropy2(n_left as f64, n_right as f64);
            let c = Candidate {
                feature,
                threshold: here + (next - here) / 2.0,
                gain,
                ratio: if split_info > 0.0 { gain / split_info } else { 0.0 },
                split_info,
            };
            if best_gain.is_none_or(|b| c.gain > b.gain + GAIN_EPSILON) {
                best_gain = Some(c);
            }
            if most_balanced.is_none_or(|b| c.split_info > b.split_info + GAIN_EPSILON) {
                most_balanced = Some(c);
            }
        }
        Some((best_gain?, most_balanced?))
    }

    fn choose_split(&self, idx: &[usize], counts: ClassCounts) -> Option<Candidate> {
        let width = self.rows[idx[0]].len();
        let per_feature: Vec<(Candidate, Candidate)> = (0..width)
            .filter_map(|f| self.feature_candidates(idx, counts, f))
            .collect();
        if per_feature.is_empty() {
            return None;
        }
        let informative: Vec<Candidate> = per_feature
            .iter()
            .map(|p| p.0)
            .filter(|c| c.gain > GAIN_EPSILON)
            .collect();
        if informative.is_empty() {
            // Impure node where no single threshold is informative (XOR-like
            // layouts). Split as evenly as possible and let deeper levels or
            // pruning sort it out.
            return per_feature
                .iter()
                .map(|p| p.1)
                .reduce(|a, b| if b.split_info > a.split_info + GAIN_EPSILON { b } else { a });
        }
        let avg_gain = informative.iter().map(|c| c.gain).sum::<f64>() / informative.len() as f64;
        informative
            .into_iter()
            .filter(|c| c.gain >= avg_gain - GAIN_EPSILON)
            .reduce(|a, b| if b.ratio > a.ratio + GAIN_EPSILON { b } else { a })
    }
}

/// Extra errors predicted at a leaf holding `n` rows with `e` errors, from
/// the upper confidence bound of the binomial error rate (C4.5's estimate).
pub fn extra_errors(n: f64, e: f64, confidence: f64) -> f64 {
    let z = Normal::standard().inverse_cdf(1.0 - confidence);
    let coeff = z * z;
    if e < 1e-6 {
        n * (1.0 - (confidence.ln() / n).exp())
    } else if e < 0.9999 {
        let v = n * (1.0 - (confidence.ln() / n).exp());
        v + e * (extra_errors(n, 1.0, confidence) - v)
    } else if e + 0.5 >= n {
        0.67 * (n - e)
    } else {
        let e5 = e + 0.5;
        let pr = (e5 + coeff / 2.0 + (coeff * (e5 * (1.0 - e5 / n) + coeff / 4.0)).sqrt()) / (n + coeff);
        n * pr - e
    }
}

fn leaf_estimate(counts: ClassCounts, confidence: f64) -> f64 {
    let e = counts.errors() as f64;
    e + extra_errors(counts.total() as f64, e, confidence)
}

/// Bottom-up subtree replacement; returns the estimated errors of `at`.
fn prune(nodes: &mut [Node], at: usize, confidence: f64) -> f64 {
    let (left, right, counts) = match nodes[at] {
        Node::Leaf { counts } => return leaf_estimate(counts, confidence),
        Node::Split {
            left, right, counts, ..
        } => (left, right, counts),
    };
    let subtree = prune(nodes, left, confidence) + prune(nodes, right, confidence);
    let as_leaf = leaf_estimate(counts, confidence);
    if as_leaf <= subtree + 0.1 {
        nodes[at] = Node::Leaf { counts };
        as_leaf
    } else {
        subtree
    }
}

/// Copies the nodes reachable from the root into a fresh arena.
fn compact(nodes: &[Node]) -> Vec<Node> {
    fn copy(src: &[Node], at: usize, out: &mut Vec<Node>) -> usize {
        let slot = out.len();
        out.push(src[at].clone());
        if let Node::Split { left, right, .. } = src[at] {
            let l = copy(src, left, out);
            let r = copy(src, right, out);
            if let Node::Split { left, right, .. } = &mut out[slot] {
                *left = l;
                *right = r;
            }
        }
        slot
    }
    let mut out = Vec::with_capacity(nodes.len());
    copy(nodes, 0, &mut out);
    out
}

pub fn train_dtree(data: &Dataset, cfg: &TreeConfig) -> Result<TreeModel> {
    data.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("dtree: empty training set"));
    }
    if cfg.min_leaf == 0 || !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return Err(Error::config(format!("invalid tree configuration: {cfg:?}")));
    }
    let mut grower = Grower {
        rows: &data.rows,
        labels: &data.labels,
        min_leaf: cfg.min_leaf,
        nodes: Vec::new(),
    };
    grower.grow((0..data.len()).collect());
    let mut nodes = grower.nodes;
    if cfg.prune {
        prune(&mut nodes, 0, cfg.confidence);
        nodes = compact(&nodes);
    }
    Ok(TreeModel {
        input_width: data.width(),
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVariant;
    use crate::seed::stage_rng;
    use rand::Rng;

    fn one_feature(points: &[(f64, Label)]) -> Dataset {
        Dataset::new(
            FeatureVariant::Doc4,
            points.iter().map(|p| vec![p.0, 0.0, 0.0, 0.0]).collect(),
            points.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    }

    fn train_acc(model: &TreeModel, data: &Dataset) -> f64 {
        let ok = data
            .rows
            .iter()
            .zip(&data.labels)
            .filter(|(r, l)| model.predict(r).unwrap().label == **l)
            .count();
        ok as f64 / data.len() as f64
    }

    #[test]
    fn pure_data_single_leaf() {
        use Label::Positive as P;
        let data = one_feature(&[(1.0, P), (2.0, P), (3.0, P)]);
        let tree = train_dtree(&data, &TreeConfig::default()).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict(&[9.0, 0.0, 0.0, 0.0]).unwrap().label, P);
    }

    #[test]
    fn threshold_separable_depth_one() {
        use Label::{Negative as N, Positive as P};
        let data = one_feature(&[(1.0, N), (2.0, N), (3.0, N), (6.0, P), (7.0, P), (8.0, P)]);
        let cfg = TreeConfig { prune: false, ..TreeConfig::default() };
        let tree = train_dtree(&data, &cfg).unwrap();
        assert_eq!(tree.depth(), 1);
        // Candidate midpoints are 1.5, 2.5, 4.5, 6.5, 7.5; only 4.5 is pure.
        match &tree.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 4.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(train_acc(&tree, &data), 1.0);
        // Pruning keeps a perfect split of six rows.
        let pruned = train_dtree(&data, &TreeConfig::default()).unwrap();
        assert_eq!(pruned.depth(), 1);
    }

    #[test]
    fn min_leaf_blocks_singleton_children() {
        use Label::{Negative as N, Positive as P};
        let data = one_feature(&[(1.0, N), (2.0, P), (3.0, P)]);
        let cfg = TreeConfig { prune: false, ..TreeConfig::default() };
        let tree = train_dtree(&data, &cfg).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        let cfg = TreeConfig { min_leaf: 1, prune: false, ..TreeConfig::default() };
        assert_eq!(train_dtree(&data, &cfg).unwrap().depth(), 1);
    }

    #[test]
    fn xor_fits_without_pruning() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let labels = vec![Label::Negative, Label::Positive, Label::Positive, Label::Negative];
        let data = Dataset {
            variant: FeatureVariant::Doc4,
            rows: rows.into_iter().map(|mut r| { r.extend([0.0, 0.0]); r }).collect(),
            labels,
        };
        let cfg = TreeConfig { min_leaf: 1, prune: false, ..TreeConfig::default() };
        let tree = train_dtree(&data, &cfg).unwrap();
        assert_eq!(train_acc(&tree, &data), 1.0);
    }

    #[test]
    fn leaf_score_mapping() {
        let c = ClassCounts { pos: 3, neg: 1 };
        assert_eq!(c.majority(), Label::Positive);
        assert_eq!(leaf_score(c), 0.25);
        let tree = TreeModel { input_width: 1, nodes: vec![Node::Leaf { counts: c }] };
        let p = tree.predict(&[0.0]).unwrap();
        assert_eq!((p.label, p.score), (Label::Positive, 0.25));
    }

    #[test]
    fn pessimistic_estimates() {
        // z for CF = 0.25 is the 75th percentile of the standard normal.
        let z = Normal::standard().inverse_cdf(0.75);
        assert!((z - 0.6744897501960817).abs() < 1e-9);
        // No errors: N (1 - CF^(1/N)).
        assert!((extra_errors(6.0, 0.0, 0.25) - 6.0 * (1.0 - 0.25f64.powf(1.0 / 6.0))).abs() < 1e-12);
        // Estimates grow with observed errors.
        assert!(leaf_estimate(ClassCounts { pos: 10, neg: 2 }, 0.25) > leaf_estimate(ClassCounts { pos: 11, neg: 1 }, 0.25));
    }

    #[test]
    fn noisy_data_gets_pruned() {
        let mut rng = stage_rng(3, "noise");
        let rows: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random::<f64>(), rng.random(), 0.0, 0.0]).collect();
        let labels: Vec<Label> = rows
            .iter()
            .map(|r| {
                let clean = if r[0] > 0.5 { Label::Positive } else { Label::Negative };
                if rng.random::<f64>() < 0.1 { clean.flip() } else { clean }
            })
            .collect();
        let data = Dataset::new(FeatureVariant::Doc4, rows, labels).unwrap();
        let full = train_dtree(&data, &TreeConfig { prune: false, ..TreeConfig::default() }).unwrap();
        let pruned = train_dtree(&data, &TreeConfig::default()).unwrap();
        assert!(pruned.leaf_count() < full.leaf_count());
        assert!(pruned.nodes.len() == 2 * pruned.leaf_count() - 1);
    }

    #[test]
    fn perfect_fit_on_conflict_free_random_data() {
        let mut rng = stage_rng(4, "fit");
        let rows: Vec<Vec<f64>> = (0..150)
            .map(|_| (0..4).map(|_| (rng.random::<f64>() * 10.0).round()).collect())
            .collect();
        let mut seen = std::collections::HashMap::new();
        let mut kept_rows = Vec::new();
        let mut labels = Vec::new();
        for r in rows {
            let key: Vec<i64> = r.iter().map(|v| *v as i64).collect();
            if seen.contains_key(&key) {
                continue;
            }
            let l = if rng.random::<bool>() { Label::Positive } else { Label::Negative };
            seen.insert(key, l);
            kept_rows.push(r);
            labels.push(l);
        }
        let data = Dataset::new(FeatureVariant::Doc4, kept_rows, labels).unwrap();
        let cfg = TreeConfig { min_leaf: 1, prune: false, ..TreeConfig::default() };
        let tree = train_dtree(&data, &cfg).unwrap();
        assert_eq!(train_acc(&tree, &data), 1.0);
    }
}
