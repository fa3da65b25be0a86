//! Evaluation: confusion matrices, accuracy / precision / recall / F1 with
//! weighted or macro averaging, the method-comparison table and the
//! accuracy-vs-epoch curve export.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// C×C count matrix; rows index the true class, columns the prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix {
            n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn count(&self, true_class: usize, predicted: usize) -> u64 {
        self.counts[true_class * self.n_classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn row_sum(&self, c: usize) -> u64 {
        (0..self.n_classes).map(|p| self.count(c, p)).sum()
    }

    fn col_sum(&self, c: usize) -> u64 {
        (0..self.n_classes).map(|t| self.count(t, c)).sum()
    }
}

/// Counts (true, predicted) pairs into a `C`×`C` matrix.
pub fn confusion(true_labels: &[usize], predicted: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if true_labels.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: true_labels.len(),
            right: predicted.len(),
        });
    }
    let mut m = ConfusionMatrix::new(n_classes);
    for (&t, &p) in true_labels.iter().zip(predicted) {
        if t >= n_classes {
            return Err(Error::InvalidClass { class: t, n_classes });
        }
        if p >= n_classes {
            return Err(Error::InvalidClass { class: p, n_classes });
        }
        m.counts[t * n_classes + p] += 1;
    }
    Ok(m)
}

/// How per-class scores are combined into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Weighted by class support; averaged recall then equals accuracy.
    #[default]
    Weighted,
    /// Every class counts the same.
    Macro,
}

/// Aggregate scores computed from a confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when some class had a zero denominator and its precision or
    /// recall was defined as 0.
    pub zero_division: bool,
}

/// Per-class precision = TP/(TP+FP), recall = TP/(TP+FN),
/// f1 = 2PR/(P+R); zero denominators score 0. Accuracy = trace/total.
pub fn metrics(m: &ConfusionMatrix, averaging: Averaging) -> Result<Metrics> {
    let total = m.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = m.n_classes();
    let mut zero_division = false;
    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut f1 = 0.0;
    let mut weight_total = 0.0;
    for c in 0..n {
        let tp = m.count(c, c) as f64;
        let support = m.row_sum(c) as f64;
        let predicted = m.col_sum(c) as f64;
        let p = if predicted > 0.0 {
            tp / predicted
        } else {
            zero_division = true;
            0.0
        };
        let r = if support > 0.0 {
            tp / support
        } else {
            zero_division = true;
            0.0
        };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };

        let weight = match averaging {
            Averaging::Weighted => support,
            Averaging::Macro => 1.0,
        };
        precision += weight * p;
        recall += weight * r;
        f1 += weight * f;
        weight_total += weight;
    }
    precision /= weight_total;
    recall /= weight_total;
    f1 /= weight_total;

    let trace: u64 = (0..n).map(|c| m.count(c, c)).sum();
    Ok(Metrics {
        accuracy: trace as f64 / total as f64,
        precision,
        recall,
        f1,
        zero_division,
    })
}

/// One evaluated method: train/test accuracy plus test-set metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: ConfusionMatrix,
    #[serde(default)]
    pub zero_division_warning: bool,
}

impl EvalReport {
    /// Builds a report from test-set label pairs and a separately measured
    /// training accuracy. Metrics use weighted averaging.
    pub fn from_predictions(
        method: impl Into<String>,
        train_accuracy: f64,
        true_labels: &[usize],
        predicted: &[usize],
        n_classes: usize,
    ) -> Result<Self> {
        let cm = confusion(true_labels, predicted, n_classes)?;
        let m = metrics(&cm, Averaging::Weighted)?;
        Ok(EvalReport {
            method: method.into(),
            train_accuracy,
            test_accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            confusion: cm,
            zero_division_warning: m.zero_division,
        })
    }
}

mod report;
pub use report::{epoch_curve, report_csv, report_table, EpochStats};

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn perfect_predictions_are_diagonal() {
        let t = vec![0, 1, 2, 1, 0];
        let m = confusion(&t, &t, 3).unwrap();
        for c in 0..3 {
            assert_eq!(m.count(c, c) as usize, t.iter().filter(|&&x| x == c).count());
            for p in 0..3 {
                if p != c {
                    assert_eq!(m.count(c, p), 0);
                }
            }
        }
        let s = metrics(&m, Averaging::Weighted).unwrap();
        assert_eq!((s.accuracy, s.precision, s.recall, s.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn direct_count_example() {
        let m = confusion(&[0, 0, 1], &[0, 1, 1], 2).unwrap();
        assert_eq!(m.count(0, 0), 1);
        assert_eq!(m.count(0, 1), 1);
        assert_eq!(m.count(1, 0), 0);
        assert_eq!(m.count(1, 1), 1);
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn trace_over_total_matches_direct_accuracy() {
        let mut rng = crate::test_rng(23);
        let t: Vec<usize> = (0..100).map(|_| rng.gen_range(0..4)).collect();
        let p: Vec<usize> = (0..100).map(|_| rng.gen_range(0..4)).collect();
        let m = confusion(&t, &p, 4).unwrap();
        let direct = t.iter().zip(&p).filter(|(a, b)| a == b).count() as f64 / 100.0;
        let s = metrics(&m, Averaging::Weighted).unwrap();
        assert!((s.accuracy - direct).abs() < 1e-15);
        assert_eq!(m.total(), 100);
    }

    #[test]
    fn mismatched_lengths_and_bad_labels_rejected() {
        assert!(matches!(
            confusion(&[0, 1], &[0], 2),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            confusion(&[5], &[0], 2),
            Err(Error::InvalidClass { class: 5, .. })
        ));
        assert!(matches!(
            metrics(&ConfusionMatrix::new(3), Averaging::Weighted),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn hand_computed_two_class_case() {
        // [[8,2],[3,7]]
        let mut t = Vec::new();
        let mut p = Vec::new();
        for (tc, pc, n) in [(0, 0, 8), (0, 1, 2), (1, 0, 3), (1, 1, 7)] {
            for _ in 0..n {
                t.push(tc);
                p.push(pc);
            }
        }
        let m = confusion(&t, &p, 2).unwrap();
        let s = metrics(&m, Averaging::Weighted).unwrap();

        // hand arithmetic from the four counts
        let p0 = 8.0 / 11.0;
        let r0 = 0.8;
        let p1 = 7.0 / 9.0;
        let r1 = 0.7;
        let f0 = 2.0 * p0 * r0 / (p0 + r0);
        let f1 = 2.0 * p1 * r1 / (p1 + r1);
        assert!((s.accuracy - 0.75).abs() < 1e-12);
        assert!((s.precision - (p0 + p1) / 2.0).abs() < 1e-12);
        assert!((s.recall - (r0 + r1) / 2.0).abs() < 1e-12);
        assert!((s.f1 - (f0 + f1) / 2.0).abs() < 1e-12);
        // per-class f1 sits between precision and recall
        assert!(f0 >= r0.min(p0) && f0 <= r0.max(p0));
        assert!(f1 >= r1.min(p1) && f1 <= r1.max(p1));
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> ConfusionMatrix {
        let mut m = ConfusionMatrix::new(n);
        for v in m.counts.iter_mut() {
            *v = rng.gen_range(0..30);
        }
        m
    }

    #[test]
    fn weighted_recall_equals_accuracy() {
        let mut rng = crate::test_rng(77);
        for _ in 0..100 {
            let n = rng.gen_range(2..6);
            let m = random_matrix(&mut rng, n);
            if m.total() == 0 {
                continue;
            }
            let s = metrics(&m, Averaging::Weighted).unwrap();
            assert!(
                (s.recall - s.accuracy).abs() < 1e-12,
                "recall {} vs accuracy {}",
                s.recall,
                s.accuracy
            );
        }
    }

    #[test]
    fn zero_support_class_never_produces_nan() {
        // class 2 never appears in truth or prediction
        let m = confusion(&[0, 1, 0], &[1, 1, 0], 3).unwrap();
        for avg in [Averaging::Weighted, Averaging::Macro] {
            let s = metrics(&m, avg).unwrap();
            for v in [s.accuracy, s.precision, s.recall, s.f1] {
                assert!(v.is_finite());
            }
        }
        assert!(metrics(&m, Averaging::Macro).unwrap().zero_division);
    }

    #[test]
    fn metrics_invariant_under_class_relabeling() {
        let mut rng = crate::test_rng(31);
        for _ in 0..20 {
            let n = 4;
            let m = random_matrix(&mut rng, n);
            if m.total() == 0 {
                continue;
            }
            // apply a random permutation to rows and columns together
            let mut perm: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            perm.shuffle(&mut rng);
            let mut pm = ConfusionMatrix::new(n);
            for t in 0..n {
                for p in 0..n {
                    pm.counts[perm[t] * n + perm[p]] = m.count(t, p);
                }
            }
            let a = metrics(&m, Averaging::Weighted).unwrap();
            let b = metrics(&pm, Averaging::Weighted).unwrap();
            assert!((a.accuracy - b.accuracy).abs() < 1e-12);
            assert!((a.precision - b.precision).abs() < 1e-12);
            assert!((a.recall - b.recall).abs() < 1e-12);
            assert!((a.f1 - b.f1).abs() < 1e-12);
        }
    }
}
