use std::fmt::Write as _;

use serde::Serialize;

use super::metrics::{compute_metrics, ConfusionCounts, Metrics};
use super::EvalError;
use crate::{Label, Scalar};

/// ROC points ordered by decreasing threshold, starting at (0, 0) with an
/// infinite threshold and ending at (1, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve<T> {
    /// `(fpr, tpr)` pairs.
    pub points: Vec<(T, T)>,
    pub thresholds: Vec<T>,
}

impl<T: Scalar> RocCurve<T> {
    /// CSV with header `threshold,fpr,tpr`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for (t, (x, y)) in self.thresholds.iter().zip(&self.points) {
            writeln!(out, "{t},{x},{y}").unwrap();
        }
        out
    }
}

fn check<T: Scalar>(scores: &[T], labels: &[Label]) -> Result<(usize, usize), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch { expected: scores.len(), found: labels.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::InvalidInput("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l == Label::Pos).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    Ok((pos, neg))
}

/// ROC curve over the distinct score values and its trapezoidal area.
///
/// Tied scores form a single step. The area is accumulated in integer counts
/// and divided once, so it is exact up to a single rounding.
pub fn roc_auc<T: Scalar>(scores: &[T], labels: &[Label]) -> Result<(RocCurve<T>, T), EvalError> {
    let (n_pos, n_neg) = check(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("no NaN"));

    let (p, n) = (T::count(n_pos), T::count(n_neg));
    let mut points = vec![(T::zero(), T::zero())];
    let mut thresholds = vec![T::infinity()];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut twice_area: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            match labels[order[i]] {
                Label::Pos => tp += 1,
                Label::Neg => fp += 1,
            }
            i += 1;
        }
        twice_area += (fp - fp0) as u128 * (tp + tp0) as u128;
        points.push((T::count(fp as usize) / n, T::count(tp as usize) / p));
        thresholds.push(s);
    }
    let auc = twice_area as f64 / (2.0 * n_pos as f64 * n_neg as f64);
    Ok((RocCurve { points, thresholds }, T::lit(auc)))
}

/// `P(s+ > s-) + P(s+ == s-) / 2` via mid-ranks.
pub fn mann_whitney_auc<T: Scalar>(scores: &[T], labels: &[Label]) -> Result<T, EvalError> {
    let (n_pos, n_neg) = check(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("no NaN"));
    // Ranks are doubled so mid-ranks stay integral.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let twice_mid = (i + 1 + j) as u128;
        twice_rank_sum += twice_mid * order[i..j].iter().filter(|&&k| labels[k] == Label::Pos).count() as u128;
        i = j;
    }
    let p = n_pos as u128;
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(T::lit(twice_u as f64 / (2.0 * n_pos as f64 * n_neg as f64)))
}

/// Confusion counts at threshold 0 plus the ROC analysis for one score set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct ScoreSummary<T> {
    pub counts: ConfusionCounts,
    pub metrics: Metrics<T>,
    pub auc: T,
    #[serde(skip)]
    pub roc: RocCurve<T>,
}

pub fn score_predictions<T: Scalar>(scores: &[T], labels: &[Label]) -> Result<ScoreSummary<T>, EvalError> {
    let (roc, auc) = roc_auc(scores, labels)?;
    let predicted: Vec<Label> = scores.iter().map(|&s| Label::from_decision(s)).collect();
    let counts = ConfusionCounts::from_predictions(labels, &predicted);
    Ok(ScoreSummary { counts, metrics: compute_metrics(&counts), auc, roc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Neg, Pos};

    #[test]
    fn perfect_separation() {
        let (_, auc) = roc_auc(&[0.9, 0.8, 0.1, 0.2], &[Pos, Pos, Neg, Neg]).unwrap();
        assert_eq!(auc, 1.0);
    }

    #[test]
    fn three_of_four_pairs() {
        let s = [0.8, 0.4, 0.6, 0.2];
        let y = [Pos, Pos, Neg, Neg];
        let (curve, auc) = roc_auc(&s, &y).unwrap();
        assert_eq!(auc, 0.75);
        assert_eq!(mann_whitney_auc(&s, &y).unwrap(), 0.75);
        assert_eq!(curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.points.last(), Some(&(1.0, 1.0)));
        assert_eq!(curve.thresholds[0], f64::INFINITY);
    }

    #[test]
    fn ties_form_one_step() {
        let (curve, auc) = roc_auc(&[0.5, 0.5, 0.5, 0.1], &[Pos, Neg, Pos, Neg]).unwrap();
        assert_eq!(curve.points.len(), 3);
        assert_eq!(auc, 0.75);
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(roc_auc(&[0.1, 0.2], &[Pos, Pos]), Err(EvalError::SingleClass)));
    }

    #[test]
    fn csv_header() {
        let (curve, _) = roc_auc(&[1.0, 0.0], &[Pos, Neg]).unwrap();
        assert_eq!(curve.to_csv_string(), "threshold,fpr,tpr\ninf,0,0\n1,0,1\n0,1,1\n");
    }

    proptest! {
        #[test]
        fn flip_and_monotone(raw in proptest::collection::vec((0u8..6, any::<bool>()), 2..60)) {
            let s: Vec<f64> = raw.iter().map(|&(v, _)| v as f64 / 5.0).collect();
            let y: Vec<Label> = raw.iter().map(|&(_, b)| if b { Pos } else { Neg }).collect();
            let flipped: Vec<Label> = y.iter().map(|l| l.flipped()).collect();
            prop_assume!(y.contains(&Pos) && y.contains(&Neg));
            let (curve, auc) = roc_auc(&s, &y).unwrap();
            let (_, auc_f) = roc_auc(&s, &flipped).unwrap();
            prop_assert!((auc + auc_f - 1.0).abs() < 1e-12);
            prop_assert!((auc - mann_whitney_auc(&s, &y).unwrap()).abs() < 1e-12);
            for w in curve.points.windows(2) {
                prop_assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
            }
        }
    }
}
