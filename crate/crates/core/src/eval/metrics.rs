use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, N_CLASSES};

/// Counts indexed `[true][predicted]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub [[u64; N_CLASSES]; N_CLASSES]);

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..N_CLASSES).map(|i| self.0[i][i]).sum()
    }

    /// `trace / total`, or 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    pub fn support(&self, class: usize) -> u64 {
        self.0[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.0.iter().map(|row| row[class]).sum()
    }
}

/// Entry `(i, j)` counts rows with true code `i` predicted as `j`.
pub fn confusion_matrix(truth: &[u8], pred: &[u8]) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::Shape(format!(
            "{} true labels vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    let mut m = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(pred) {
        for c in [t, p] {
            if c as usize >= N_CLASSES {
                return Err(Error::InvalidLabel(i64::from(c)));
            }
        }
        m.0[t as usize][p as usize] += 1;
    }
    Ok(m)
}

pub fn confusion_from_labels(truth: &[EmotionLabel], pred: &[EmotionLabel]) -> Result<ConfusionMatrix> {
    let t: Vec<u8> = truth.iter().map(|l| l.code()).collect();
    let p: Vec<u8> = pred.iter().map(|l| l.code()).collect();
    confusion_matrix(&t, &p)
}

/// A ratio whose 0/0 case is reported as 0 and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub undefined: bool,
}

impl Ratio {
    fn of(num: f64, den: f64) -> Self {
        if den == 0.0 {
            Ratio { value: 0.0, undefined: true }
        } else {
            Ratio { value: num / den, undefined: false }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: EmotionLabel,
    pub name: String,
    pub precision: Ratio,
    pub recall: Ratio,
    pub f1: Ratio,
    pub support: u64,
}

/// Per-class precision, recall, F1 and support.
pub fn prf1(m: &ConfusionMatrix) -> Vec<ClassMetrics> {
    EmotionLabel::ALL
        .iter()
        .map(|&label| {
            let c = label.index();
            let tp = m.0[c][c] as f64;
            let precision = Ratio::of(tp, m.predicted(c) as f64);
            let recall = Ratio::of(tp, m.support(c) as f64);
            let f1 = Ratio::of(
                2.0 * precision.value * recall.value,
                precision.value + recall.value,
            );
            ClassMetrics {
                label,
                name: label.name().to_string(),
                precision,
                recall,
                f1,
                support: m.support(c),
            }
        })
        .collect()
}
