use serde::{Serialize, Serializer};

use crate::{Label, Scalar};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn new(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    /// Tallies predictions against reference labels, pairing by position.
    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Self {
        let mut c = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Label::Pos, Label::Pos) => c.tp += 1,
                (Label::Neg, Label::Pos) => c.fp += 1,
                (Label::Neg, Label::Neg) => c.tn += 1,
                (Label::Pos, Label::Neg) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self { tp: self.tp + o.tp, fp: self.fp + o.fp, tn: self.tn + o.tn, fn_: self.fn_ + o.fn_ }
    }
}

/// A ratio that is either a number or undefined because its denominator is zero.
///
/// Serializes as the number or as the string `"undefined"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric<T> {
    Defined(T),
    Undefined,
}

impl<T: Scalar> Metric<T> {
    fn ratio(num: usize, den: usize) -> Self {
        if den == 0 {
            Metric::Undefined
        } else {
            Metric::Defined(T::count(num) / T::count(den))
        }
    }

    pub fn value(self) -> Option<T> {
        match self {
            Metric::Defined(v) => Some(v),
            Metric::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Metric::Defined(_))
    }
}

impl<T: Scalar> std::fmt::Display for Metric<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Defined(v) => write!(f, "{v}"),
            Metric::Undefined => f.write_str("undefined"),
        }
    }
}

impl<T: Scalar> Serialize for Metric<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Metric::Defined(v) => v.serialize(s),
            Metric::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct Metrics<T> {
    pub accuracy: Metric<T>,
    pub precision: Metric<T>,
    pub sensitivity: Metric<T>,
    pub specificity: Metric<T>,
    pub f1: Metric<T>,
}

/// Harmonic mean of precision and sensitivity.
pub fn f1_from_rates<T: Scalar>(precision: Metric<T>, sensitivity: Metric<T>) -> Metric<T> {
    match (precision, sensitivity) {
        (Metric::Defined(p), Metric::Defined(s)) if p + s > T::zero() => {
            Metric::Defined(T::lit(2.0) * p * s / (p + s))
        }
        _ => Metric::Undefined,
    }
}

pub fn compute_metrics<T: Scalar>(c: &ConfusionCounts) -> Metrics<T> {
    let precision = Metric::ratio(c.tp, c.tp + c.fp);
    let sensitivity = Metric::ratio(c.tp, c.tp + c.fn_);
    Metrics {
        accuracy: Metric::ratio(c.tp + c.tn, c.total()),
        precision,
        sensitivity,
        specificity: Metric::ratio(c.tn, c.tn + c.fp),
        f1: f1_from_rates(precision, sensitivity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(m: Metric<f64>) -> f64 {
        m.value().unwrap()
    }

    #[test]
    fn published_rates_give_f1() {
        let f1 = v(f1_from_rates(Metric::Defined(0.905), Metric::Defined(0.956)));
        assert!((f1 - 0.9299).abs() < 5e-4, "{f1}");
    }

    #[test]
    fn perfect_classifier() {
        let m = compute_metrics::<f64>(&ConfusionCounts::new(50, 0, 50, 0));
        for x in [m.accuracy, m.precision, m.sensitivity, m.specificity, m.f1] {
            assert_eq!(v(x), 1.0);
        }
    }

    #[test]
    fn worked_counts() {
        let m = compute_metrics::<f64>(&ConfusionCounts::new(8, 2, 7, 3));
        assert!((v(m.accuracy) - 0.75).abs() < 1e-12);
        assert!((v(m.precision) - 0.8).abs() < 1e-12);
        assert!((v(m.sensitivity) - 8.0 / 11.0).abs() < 1e-12);
        assert!((v(m.specificity) - 7.0 / 9.0).abs() < 1e-12);
        assert!((v(m.f1) - 16.0 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_is_explicit() {
        let m = compute_metrics::<f64>(&ConfusionCounts::new(0, 0, 5, 0));
        assert_eq!(m.precision, Metric::Undefined);
        assert_eq!(m.sensitivity, Metric::Undefined);
        assert_eq!(m.f1, Metric::Undefined);
        assert_eq!(v(m.specificity), 1.0);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"precision\":\"undefined\""), "{json}");
        assert!(json.contains("\"accuracy\":1.0"), "{json}");
    }

    proptest! {
        #[test]
        fn f1_is_harmonic_mean(tp in 0usize..50, fp in 0usize..50, tn in 0usize..50, fn_ in 0usize..50) {
            let c = ConfusionCounts::new(tp, fp, tn, fn_);
            prop_assume!(c.total() > 0);
            let m = compute_metrics::<f64>(&c);
            if let (Some(p), Some(s)) = (m.precision.value(), m.sensitivity.value()) {
                if p + s > 0.0 {
                    let h = 2.0 / (1.0 / p + 1.0 / s);
                    prop_assert!((m.f1.value().unwrap() - h).abs() < 1e-12);
                }
            }
        }
    }
}
