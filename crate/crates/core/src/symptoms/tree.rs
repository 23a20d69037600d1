//! CART classification trees with Gini impurity.
//!
//! Split costs are compared as exact rationals, so equal-cost candidates are
//! genuinely tied and the documented tie-break (lowest feature index, then
//! lowest threshold) decides. This also makes training independent of row
//! order.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::record::{FeatureVector, FEATURE_SCHEMA_VERSION};
use super::SymptomError;
use crate::category::Source;
use crate::score::{Probability, ProbabilityScore};

/// Version of the tree JSON layout itself.
pub const TREE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 5,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Node {
    /// Rows with `x[feature_index] < threshold` go left.
    Split {
        feature_index: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        positive_fraction: f64,
        sample_count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionTree {
    pub format_version: u32,
    pub feature_schema_version: u32,
    pub n_features: usize,
    pub max_depth: usize,
    /// Pre-order; node 0 is the root and children always follow parents.
    pub nodes: Vec<Node>,
}

/// Half of `n * gini` for a node: `pos * neg / n`, as a fraction.
#[derive(Debug, Clone, Copy)]
struct Cost {
    num: u128,
    den: u128,
}

impl Cost {
    fn node(pos: usize, n: usize) -> Cost {
        Cost {
            num: (pos * (n - pos)) as u128,
            den: n.max(1) as u128,
        }
    }

    /// Sum of the two children's costs.
    fn split(lp: usize, ln: usize, rp: usize, rn: usize) -> Cost {
        let (lp, ln, rp, rn) = (lp as u128, ln as u128, rp as u128, rn as u128);
        Cost {
            num: lp * (ln - lp) * rn + rp * (rn - rp) * ln,
            den: ln * rn,
        }
    }

    fn cmp(&self, other: &Cost) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    cost: Cost,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        match self.cost.cmp(&other.cost) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => (self.feature, self.threshold) < (other.feature, other.threshold),
        }
    }
}

struct Trainer<'a> {
    rows: Vec<&'a [f64]>,
    labels: Vec<bool>,
    config: TreeConfig,
    nodes: Vec<Node>,
}

impl Trainer<'_> {
    fn best_split(&self, idx: &[usize]) -> Option<Candidate> {
        let n_features = self.rows[0].len();
        let total_pos = idx.iter().filter(|&&i| self.labels[i]).count();
        let n = idx.len();
        let mut best: Option<Candidate> = None;
        let mut order = idx.to_vec();
        for feature in 0..n_features {
            order.sort_by(|&a, &b| self.rows[a][feature].total_cmp(&self.rows[b][feature]));
            let (mut left_n, mut left_pos) = (0, 0);
            for w in 0..n - 1 {
                let i = order[w];
                left_n += 1;
                left_pos += self.labels[i] as usize;
                let here = self.rows[i][feature];
                let next = self.rows[order[w + 1]][feature];
                if here == next {
                    continue;
                }
                let right_n = n - left_n;
                if left_n < self.config.min_leaf || right_n < self.config.min_leaf {
                    continue;
                }
                let cand = Candidate {
                    feature,
                    threshold: (here + next) / 2.0,
                    cost: Cost::split(left_pos, left_n, total_pos - left_pos, right_n),
                };
                if best.as_ref().is_none_or(|b| cand.beats(b)) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        let at = self.nodes.len();
        let leaf = Node::Leaf {
            positive_fraction: pos as f64 / n as f64,
            sample_count: n,
        };
        self.nodes.push(leaf);
        if pos == 0 || pos == n || depth >= self.config.max_depth {
            return at;
        }
        let Some(split) = self.best_split(&idx) else {
            return at;
        };
        // only strictly improving splits
        if split.cost.cmp(&Cost::node(pos, n)) != Ordering::Less {
            return at;
        }
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.rows[i][split.feature] < split.threshold);
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[at] = Node::Split {
            feature_index: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

/// Grows a tree greedily: at each node the (feature, midpoint threshold)
/// pair with the lowest weighted child Gini, stopping on pure nodes, at
/// `max_depth`, when no split leaves `min_leaf` rows on both sides, or when
/// no split strictly lowers impurity.
pub fn train_tree(data: &[(FeatureVector, bool)], config: TreeConfig) -> Result<DecisionTree, SymptomError> {
    let first = data.first().ok_or(SymptomError::EmptyDataset)?;
    let n_features = first.0.len();
    if let Some((v, _)) = data.iter().find(|(v, _)| v.len() != n_features) {
        return Err(SymptomError::SchemaMismatch {
            expected: n_features,
            found: v.len(),
        });
    }
    if data.iter().any(|(v, _)| v.as_slice().iter().any(|x| !x.is_finite())) {
        return Err(SymptomError::InvalidTree("non-finite feature value".into()));
    }
    let config = TreeConfig {
        min_leaf: config.min_leaf.max(1),
        ..config
    };
    let mut trainer = Trainer {
        rows: data.iter().map(|(v, _)| v.as_slice()).collect(),
        labels: data.iter().map(|(_, l)| *l).collect(),
        config,
        nodes: Vec::new(),
    };
    trainer.grow((0..data.len()).collect(), 0);
    Ok(DecisionTree {
        format_version: TREE_FORMAT_VERSION,
        feature_schema_version: FEATURE_SCHEMA_VERSION,
        n_features,
        max_depth: config.max_depth,
        nodes: trainer.nodes,
    })
}

impl DecisionTree {
    /// A tree that returns `positive_fraction` for every input.
    pub fn constant(positive_fraction: f64, n_features: usize) -> Self {
        DecisionTree {
            format_version: TREE_FORMAT_VERSION,
            feature_schema_version: FEATURE_SCHEMA_VERSION,
            n_features,
            max_depth: 0,
            nodes: vec![Node::Leaf {
                positive_fraction,
                sample_count: 0,
            }],
        }
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf `features` lands in.
    pub fn leaf_index(&self, features: &[f64]) -> Result<usize, SymptomError> {
        if features.len() != self.n_features {
            return Err(SymptomError::SchemaMismatch {
                expected: self.n_features,
                found: features.len(),
            });
        }
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return Ok(at),
                Node::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => at = if features[feature_index] < threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<ProbabilityScore, SymptomError> {
        let leaf = self.leaf_index(features.as_slice())?;
        let Node::Leaf { positive_fraction, .. } = self.nodes[leaf] else {
            unreachable!("leaf_index returns leaves")
        };
        let p = Probability::new(positive_fraction).map_err(|e| SymptomError::InvalidTree(e.to_string()))?;
        Ok(ProbabilityScore::new(Source::Symptoms, p))
    }

    /// Structural checks for trees read from disk.
    pub fn validate(&self) -> Result<(), SymptomError> {
        let bad = |m: String| Err(SymptomError::InvalidTree(m));
        if self.format_version != TREE_FORMAT_VERSION {
            return bad(format!("format_version {} unsupported", self.format_version));
        }
        if self.feature_schema_version != FEATURE_SCHEMA_VERSION {
            return bad(format!(
                "feature_schema_version {} does not match encoder version {FEATURE_SCHEMA_VERSION}",
                self.feature_schema_version
            ));
        }
        if self.nodes.is_empty() {
            return bad("no nodes".into());
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { positive_fraction, .. } => {
                    if !(0.0..=1.0).contains(&positive_fraction) {
                        return bad(format!("leaf {i} fraction {positive_fraction} outside [0, 1]"));
                    }
                }
                Node::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    if feature_index >= self.n_features {
                        return bad(format!("node {i} splits on feature {feature_index} of {}", self.n_features));
                    }
                    if !threshold.is_finite() {
                        return bad(format!("node {i} has a non-finite threshold"));
                    }
                    for child in [left, right] {
                        if child <= i || child >= self.nodes.len() {
                            return bad(format!("node {i} has invalid child {child}"));
                        }
                        parents[child] += 1;
                    }
                }
            }
        }
        if let Some(i) = (1..self.nodes.len()).find(|&i| parents[i] != 1) {
            return bad(format!("node {i} has {} parents", parents[i]));
        }
        if self.depth() > self.max_depth {
            return bad(format!("depth {} exceeds max_depth {}", self.depth(), self.max_depth));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SymptomError> {
        let tree: DecisionTree =
            serde_json::from_str(text).map_err(|e| SymptomError::InvalidTree(e.to_string()))?;
        tree.validate()?;
        Ok(tree)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }
}

/// Free-function form of [`DecisionTree::predict`].
pub fn tree_predict(tree: &DecisionTree, features: &FeatureVector) -> Result<ProbabilityScore, SymptomError> {
    tree.predict(features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symptoms::record::{SymptomRecord, N_FEATURES};

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector(v.to_vec())
    }

    #[test]
    fn empty_dataset() {
        assert_eq!(train_tree(&[], TreeConfig::default()), Err(SymptomError::EmptyDataset));
    }

    #[test]
    fn pure_root_is_a_single_leaf() {
        let data: Vec<_> = (0..10).map(|i| (fv(&[i as f64]), false)).collect();
        let tree = train_tree(&data, TreeConfig::default()).unwrap();
        assert_eq!(
            tree.nodes,
            vec![Node::Leaf {
                positive_fraction: 0.0,
                sample_count: 10
            }]
        );
    }

    #[test]
    fn perfect_separator_gives_depth_one() {
        // feature 1 separates; feature 0 is noise
        let data: Vec<_> = (0..12)
            .map(|i| (fv(&[(i % 3) as f64, if i < 6 { 0.0 } else { 1.0 }]), i >= 6))
            .collect();
        let tree = train_tree(&data, TreeConfig { max_depth: 5, min_leaf: 1 }).unwrap();
        assert_eq!(tree.depth(), 1);
        match tree.nodes[0] {
            Node::Split {
                feature_index,
                threshold,
                ..
            } => {
                assert_eq!(feature_index, 1);
                assert_eq!(threshold, 0.5);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn constant_tree_predicts_its_fraction() {
        let tree = DecisionTree::constant(0.3, N_FEATURES);
        let p = tree.predict(&SymptomRecord::baseline().encode()).unwrap();
        assert_eq!(p.value.value(), 0.3);
        assert_eq!(p.source, Source::Symptoms);
    }

    #[test]
    fn routes_cough_positive_to_the_cough_leaf() {
        let mut data = Vec::new();
        for i in 0..20 {
            let rec = SymptomRecord {
                cough: i % 2 == 0,
                ..SymptomRecord::baseline()
            };
            // 9 of 10 coughers positive, 1 of 10 others
            let label = if rec.cough { i != 0 } else { i == 1 };
            data.push((rec.encode(), label));
        }
        let tree = train_tree(&data, TreeConfig::default()).unwrap();
        let cough = SymptomRecord {
            cough: true,
            ..SymptomRecord::baseline()
        };
        assert_eq!(tree.predict(&cough.encode()).unwrap().value.value(), 0.9);
        assert_eq!(tree.predict(&SymptomRecord::baseline().encode()).unwrap().value.value(), 0.1);
    }

    #[test]
    fn memorizes_unique_points() {
        let data: Vec<_> = (0..15)
            .map(|i| (fv(&[i as f64, (i * 7 % 5) as f64]), (i * 13) % 3 == 0))
            .collect();
        let cfg = TreeConfig {
            max_depth: usize::MAX,
            min_leaf: 1,
        };
        let tree = train_tree(&data, cfg).unwrap();
        for (v, label) in &data {
            let want = if *label { 1.0 } else { 0.0 };
            assert_eq!(tree.predict(v).unwrap().value.value(), want);
        }
    }

    #[test]
    fn schema_mismatch() {
        let tree = DecisionTree::constant(0.5, 3);
        assert_eq!(
            tree.predict(&fv(&[0.0, 1.0])),
            Err(SymptomError::SchemaMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn no_split_when_nothing_improves() {
        // XOR: no single split lowers Gini
        let data = vec![
            (fv(&[0.0, 0.0]), false),
            (fv(&[0.0, 1.0]), true),
            (fv(&[1.0, 0.0]), true),
            (fv(&[1.0, 1.0]), false),
        ];
        let tree = train_tree(&data, TreeConfig { max_depth: 3, min_leaf: 1 }).unwrap();
        assert_eq!(tree.nodes.len(), 1);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let data: Vec<_> = (0..30).map(|i| (fv(&[i as f64, (i % 4) as f64]), i % 4 == 1)).collect();
        let tree = train_tree(&data, TreeConfig { max_depth: 3, min_leaf: 2 }).unwrap();
        let back = DecisionTree::from_json(&tree.to_json()).unwrap();
        assert_eq!(back, tree);

        let mut broken = tree.clone();
        broken.nodes.push(Node::Leaf {
            positive_fraction: 0.0,
            sample_count: 1,
        });
        assert!(broken.validate().is_err());
        let mut broken = tree.clone();
        broken.max_depth = 0;
        assert!(broken.validate().is_err());
        let mut broken = tree;
        if let Node::Split { left, .. } = &mut broken.nodes[0] {
            *left = 0;
        }
        assert!(broken.validate().is_err());
    }
}
