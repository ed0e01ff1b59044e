use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{prf1, ClassMetrics, ConfusionMatrix};
use super::split::SplitAssignment;
use crate::config::SplitMode;
use crate::label::EmotionLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMeta {
    pub mode: SplitMode,
    pub stratified: bool,
    pub seed: u64,
    pub train_fraction: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_trials: Option<usize>,
}

impl SplitMeta {
    pub fn of(split: &SplitAssignment, train_fraction: f64) -> Self {
        SplitMeta {
            mode: split.mode,
            stratified: split.stratified,
            seed: split.seed,
            train_fraction,
            train_rows: split.train.len(),
            test_rows: split.test.len(),
            train_trials: split.trials.as_ref().map(|t| t.0.len()),
            test_trials: split.trials.as_ref().map(|t| t.1.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub split: SplitMeta,
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub total: u64,
}

impl EvalReport {
    pub fn new(confusion: ConfusionMatrix, split: SplitMeta) -> Self {
        EvalReport {
            split,
            per_class: prf1(&confusion),
            accuracy: confusion.accuracy(),
            total: confusion.total(),
            confusion,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Aligned per-class table: precision, recall, F1 and data points.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14}{:>11}{:>9}{:>11}{:>14}",
            "Class-Label", "Precision", "Recall", "F1-score", "Data Points"
        );
        for c in &self.per_class {
            let _ = writeln!(
                out,
                "{:<14}{:>11.2}{:>9.2}{:>11.2}{:>14}",
                c.label.to_string(),
                c.precision.value,
                c.recall.value,
                c.f1.value,
                thousands(c.support)
            );
        }
        let _ = writeln!(
            out,
            "{:<14}{:>31.4}{:>14}",
            "Accuracy",
            self.accuracy,
            thousands(self.total)
        );
        out
    }

    /// Confusion matrix with a header row of predicted labels.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for l in EmotionLabel::ALL {
            let _ = write!(out, ",{}", l.name());
        }
        out.push('\n');
        for (l, row) in EmotionLabel::ALL.iter().zip(self.confusion.0.iter()) {
            out.push_str(l.name());
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// `1234567` -> `"1,234,567"`.
pub fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::split::split_rows;

    fn perfect() -> EvalReport {
        let mut m = ConfusionMatrix::default();
        for (i, n) in [118_542u64, 144_408, 183_908, 141_745, 117_213].into_iter().enumerate() {
            m.0[i][i] = n;
        }
        let split = split_rows(10, None, 0.7, 0).unwrap();
        EvalReport::new(m, SplitMeta::of(&split, 0.7))
    }

    #[test]
    fn thousands_separators() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(999), "999");
        assert_eq!(thousands(1000), "1,000");
        assert_eq!(thousands(705_816), "705,816");
        assert_eq!(thousands(1_646_904), "1,646,904");
    }

    #[test]
    fn table_layout() {
        let t = perfect().to_table();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[0].starts_with("Class-Label"));
        assert!(lines[1].starts_with("Disgust - 0"));
        assert!(lines[1].contains("1.00"));
        assert!(lines[1].ends_with("118,542"));
        assert!(lines[6].ends_with("705,816"));
        let width = lines[0].len();
        assert!(lines[1..6].iter().all(|l| l.len() == width));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let r = perfect();
        let csv = r.confusion_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.lines().nth(3).unwrap().starts_with("Sad,0,0,183908,0,0"));
        let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
