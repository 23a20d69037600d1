/// AUC by direct enumeration of every positive/negative pair, ties counted
/// as half. Returns `None` when either class is absent.
pub fn pairwise_auc(labels: &[bool], scores: &[f64]) -> Option<f64> {
    let mut wins = 0u64;
    let mut ties = 0u64;
    let mut n_pos = 0u64;
    let mut n_neg = 0u64;
    for (i, &li) in labels.iter().enumerate() {
        if li {
            n_pos += 1;
        } else {
            n_neg += 1;
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            if scores[i] > scores[j] {
                wins += 1;
            } else if scores[i] == scores[j] {
                ties += 1;
            }
        }
    }
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    Some((wins as f64 + 0.5 * ties as f64) / (n_pos * n_neg) as f64)
}
