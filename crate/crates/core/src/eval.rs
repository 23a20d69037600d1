//! ROC curves and AUC with Mann-Whitney tie handling.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("labels and scores differ in length ({labels} vs {scores})")]
    LengthMismatch { labels: usize, scores: usize },
    #[error("AUC needs both classes present ({positives} positive, {negatives} negative)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
}

impl EvalError {
    pub fn code(&self) -> &'static str {
        match self {
            EvalError::LengthMismatch { .. } => "LengthMismatch",
            EvalError::SingleClass { .. } => "SingleClass",
            EvalError::NonFiniteScore(_) => "NonFiniteScore",
        }
    }
}

fn check(labels: &[bool], scores: &[f64]) -> Result<(usize, usize), EvalError> {
    if labels.len() != scores.len() {
        return Err(EvalError::LengthMismatch {
            labels: labels.len(),
            scores: scores.len(),
        });
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore(bad));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass { positives, negatives });
    }
    Ok((positives, negatives))
}

/// Probability that a random positive outscores a random negative, ties
/// counting half.
///
/// Computed from midranks in O(n log n). Twice the Mann-Whitney U statistic
/// is accumulated as an integer, so the result is bit-identical to counting
/// pairs directly.
pub fn compute_auc(labels: &[bool], scores: &[f64]) -> Result<f64, EvalError> {
    let (n_pos, n_neg) = check(labels, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // sum over positives of 2 * midrank (ranks are 1-based)
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let twice_midrank = (start + end + 2) as u128;
        let pos_in_group = order[start..=end].iter().filter(|&&i| labels[i]).count() as u128;
        twice_rank_sum += twice_midrank * pos_in_group;
        start = end + 1;
    }
    let n_pos_u = n_pos as u128;
    let twice_u = twice_rank_sum - n_pos_u * (n_pos_u + 1);
    Ok((twice_u as f64 / 2.0) / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// From (0, 0) to (1, 1), nondecreasing in both coordinates.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// Area under the piecewise-linear curve through `points`.
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum()
    }
}

/// ROC curve sweeping the threshold down through every distinct score.
pub fn compute_roc(labels: &[bool], scores: &[f64]) -> Result<RocCurve, EvalError> {
    let (n_pos, n_neg) = check(labels, scores)?;
    let auc = compute_auc(labels, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        for &i in &order[start..=end] {
            if labels[i] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        });
        start = end + 1;
    }
    Ok(RocCurve { points, auc })
}
