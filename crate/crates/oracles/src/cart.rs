/// A split `x[feature] < threshold` with its exact weighted cost expressed as
/// the fraction `num / den` (proportional to weighted child Gini).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub num: u128,
    pub den: u128,
}

fn less(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 < b.0 * a.1
}

/// Cost of a node as a fraction: pos*neg/n (half the node's n*Gini).
pub fn node_cost(labels: &[u8]) -> (u128, u128) {
    let n = labels.len() as u128;
    let pos = labels.iter().filter(|&&l| l == 1).count() as u128;
    (pos * (n - pos), n.max(1))
}

/// Exhaustive search over every feature and every midpoint between
/// consecutive distinct values. Splits leaving a side with fewer than
/// `min_leaf` rows are skipped. Ties go to the lowest feature, then the
/// lowest threshold.
pub fn best_split(rows: &[Vec<f64>], labels: &[u8], min_leaf: usize) -> Option<Split> {
    let n_features = rows.first().map_or(0, |r| r.len());
    let mut best: Option<Split> = None;
    for feature in 0..n_features {
        let mut values: Vec<f64> = rows.iter().map(|r| r[feature]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let (mut ln, mut lp, mut rn, mut rp) = (0u128, 0u128, 0u128, 0u128);
            for (r, &l) in rows.iter().zip(labels) {
                if r[feature] < threshold {
                    ln += 1;
                    lp += l as u128;
                } else {
                    rn += 1;
                    rp += l as u128;
                }
            }
            if (ln as usize) < min_leaf || (rn as usize) < min_leaf {
                continue;
            }
            // lp*(ln-lp)/ln + rp*(rn-rp)/rn
            let num = lp * (ln - lp) * rn + rp * (rn - rp) * ln;
            let den = ln * rn;
            let better = match &best {
                None => true,
                Some(b) => {
                    less((num, den), (b.num, b.den))
                        || (!less((b.num, b.den), (num, den))
                            && (feature, threshold) < (b.feature, b.threshold))
                }
            };
            if better {
                best = Some(Split {
                    feature,
                    threshold,
                    num,
                    den,
                });
            }
        }
    }
    best
}

/// True when `split` strictly lowers the cost below that of the unsplit node.
pub fn improves(split: &Split, labels: &[u8]) -> bool {
    less((split.num, split.den), node_cost(labels))
}
