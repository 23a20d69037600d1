use proptest::prelude::*;
use rspscrn_core::symptoms::{train_tree, DecisionTree, FeatureVector, Node, TreeConfig};
use rspscrn_oracles::cart::{best_split, improves};

fn dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
    (1usize..=40, 1usize..=6).prop_flat_map(|(n, f)| {
        (
            prop::collection::vec(prop::collection::vec((0u8..5).prop_map(|v| v as f64), f), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

fn check(tree: &DecisionTree, at: usize, rows: &[Vec<f64>], labels: &[u8], cfg: TreeConfig, depth: usize) {
    let n = labels.len();
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let want = if pos == 0 || pos == n || depth >= cfg.max_depth {
        None
    } else {
        best_split(rows, labels, cfg.min_leaf).filter(|s| improves(s, labels))
    };
    match (&tree.nodes[at], want) {
        (Node::Leaf { sample_count, .. }, None) => assert_eq!(*sample_count, n),
        (Node::Split { feature_index, threshold, left, right }, Some(s)) => {
            assert_eq!((*feature_index, *threshold), (s.feature, s.threshold));
            let go_left: Vec<bool> = rows.iter().map(|r| r[s.feature] < s.threshold).collect();
            let part = |side: bool| -> (Vec<Vec<f64>>, Vec<u8>) {
                rows.iter()
                    .zip(labels)
                    .zip(&go_left)
                    .filter(|(_, &g)| g == side)
                    .map(|((r, &l), _)| (r.clone(), l))
                    .unzip()
            };
            let (lr, ll) = part(true);
            let (rr, rl) = part(false);
            check(tree, *left, &lr, &ll, cfg, depth + 1);
            check(tree, *right, &rr, &rl, cfg, depth + 1);
        }
        (got, want) => panic!("node {at}: {got:?} vs oracle {want:?}"),
    }
}

fn encode(rows: &[Vec<f64>], labels: &[bool]) -> Vec<(FeatureVector, bool)> {
    rows.iter().cloned().map(FeatureVector).zip(labels.iter().copied()).collect()
}

proptest! {
    #[test]
    fn every_split_is_the_exhaustive_optimum((rows, labels) in dataset(), max_depth in 0usize..6, min_leaf in 1usize..6) {
        let cfg = TreeConfig { max_depth, min_leaf };
        let tree = train_tree(&encode(&rows, &labels), cfg).unwrap();
        let l8: Vec<u8> = labels.iter().map(|&l| l as u8).collect();
        check(&tree, 0, &rows, &l8, cfg, 0);
        prop_assert!(tree.depth() <= max_depth);
    }

    #[test]
    fn row_order_does_not_matter((rows, labels) in dataset(), seed in any::<u64>()) {
        let cfg = TreeConfig::default();
        let a = train_tree(&encode(&rows, &labels), cfg).unwrap();
        let mut idx: Vec<usize> = (0..rows.len()).collect();
        // cheap deterministic shuffle
        idx.sort_by_key(|&i| (i as u64).wrapping_mul(seed | 1).rotate_left(17));
        let rows2: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let labels2: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
        let b = train_tree(&encode(&rows2, &labels2), cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn predictions_are_probabilities((rows, labels) in dataset(), probe in prop::collection::vec(-1.0f64..6.0, 6)) {
        let tree = train_tree(&encode(&rows, &labels), TreeConfig::default()).unwrap();
        let x = FeatureVector(probe[..rows[0].len()].to_vec());
        let p = tree.predict(&x).unwrap().value.value();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(tree.predict(&x).unwrap().value.value().to_bits(), p.to_bits());
        let back = DecisionTree::from_json(&tree.to_json()).unwrap();
        prop_assert_eq!(back, tree);
    }
}
