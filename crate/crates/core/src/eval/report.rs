//! Renderers for the method-comparison table and the epoch curve.

use serde::{Deserialize, Serialize};

use super::EvalReport;

/// Accuracy pair recorded after one training epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_acc: f64,
    pub test_acc: f64,
}

/// Plain-text comparison table, one row per report, scores at 3 decimals.
pub fn report_table(reports: &[EvalReport]) -> String {
    let name_width = reports
        .iter()
        .map(|r| r.method.len())
        .chain(std::iter::once("Method".len()))
        .max()
        .unwrap_or(6);
    let mut out = format!(
        "{:<name_width$}  {:>9}  {:>8}  {:>9}  {:>6}  {:>8}\n",
        "Method", "Train Acc", "Test Acc", "Precision", "Recall", "F1 Score"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<name_width$}  {:>9.3}  {:>8.3}  {:>9.3}  {:>6.3}  {:>8.3}\n",
            r.method, r.train_accuracy, r.test_accuracy, r.precision, r.recall, r.f1
        ));
    }
    out
}

/// CSV twin of [`report_table`].
pub fn report_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("method,train_acc,test_acc,precision,recall,f1\n");
    for r in reports {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
            r.method, r.train_accuracy, r.test_accuracy, r.precision, r.recall, r.f1
        ));
    }
    out
}

/// `epoch,train_acc,test_acc` rows for the accuracy-versus-epoch curve.
pub fn epoch_curve(history: &[EpochStats]) -> String {
    let mut out = String::from("epoch,train_acc,test_acc\n");
    for h in history {
        out.push_str(&format!("{},{},{}\n", h.epoch, h.train_acc, h.test_acc));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ConfusionMatrix;

    pub(crate) fn literal_report(method: &str, values: [f64; 5]) -> EvalReport {
        EvalReport {
            method: method.into(),
            train_accuracy: values[0],
            test_accuracy: values[1],
            precision: values[2],
            recall: values[3],
            f1: values[4],
            confusion: ConfusionMatrix::new(3),
            zero_division_warning: false,
        }
    }

    #[test]
    fn single_report_renders_one_data_row() {
        let table = report_table(&[literal_report("KNN", [0.9, 0.8, 0.81, 0.8, 0.79])]);
        assert_eq!(table.lines().count(), 2);
        assert!(table.lines().nth(1).unwrap().starts_with("KNN"));
    }

    #[test]
    fn csv_reparses_to_three_decimal_equality() {
        let reports = vec![
            literal_report("CNN", [0.9664, 0.8693, 0.8687, 0.8693, 0.8691]),
            literal_report("DT", [1.0, 0.762, 0.759, 0.762, 0.761]),
        ];
        let csv = report_csv(&reports);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "method,train_acc,test_acc,precision,recall,f1");
        for (line, r) in lines.zip(&reports) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[0], r.method);
            let parsed: Vec<f64> = fields[1..].iter().map(|f| f.parse().unwrap()).collect();
            let expect = [r.train_accuracy, r.test_accuracy, r.precision, r.recall, r.f1];
            for (got, want) in parsed.iter().zip(expect) {
                assert!((got - (want * 1000.0).round() / 1000.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn epoch_curve_has_one_row_per_epoch_in_order() {
        let history: Vec<EpochStats> = (1..=40)
            .map(|epoch| EpochStats {
                epoch,
                train_acc: 0.5,
                test_acc: 0.5,
            })
            .collect();
        let csv = epoch_curve(&history);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 41);
        for (i, line) in lines[1..].iter().enumerate() {
            assert!(line.starts_with(&format!("{},", i + 1)));
        }
        // constant model -> flat series
        assert!(lines[1..].iter().all(|l| l.ends_with("0.5,0.5")));
    }
}
