//! Fused dataset directory: `data.npy` (rows x 739), `labels.npy` (rows x 5)
//! and `dataset.json` recording which rows belong to which trial.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::npy::read_npy;
use crate::error::{Error, Result};
use crate::fusion::Corpus;
use crate::label::{EmotionLabel, N_CLASSES};
use crate::nn::train::onehot_to_targets;

pub const DATA_FILE: &str = "data.npy";
pub const LABELS_FILE: &str = "labels.npy";
pub const INDEX_FILE: &str = "dataset.json";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetTrial {
    pub participant: u32,
    pub session: u8,
    pub trial: u8,
    pub label: EmotionLabel,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetIndex {
    pub format_version: u32,
    pub rows: usize,
    pub cols: usize,
    /// Trials in row order.
    pub trials: Vec<DatasetTrial>,
}

impl DatasetIndex {
    pub fn new(cols: usize, trials: Vec<DatasetTrial>) -> Self {
        DatasetIndex {
            format_version: DATASET_VERSION,
            rows: trials.iter().map(|t| t.rows).sum(),
            cols,
            trials,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(INDEX_FILE);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(INDEX_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let idx: DatasetIndex = serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
        if idx.format_version != DATASET_VERSION {
            return Err(Error::format(
                &path,
                format!("dataset version {} (expected {DATASET_VERSION})", idx.format_version),
            ));
        }
        if idx.rows != idx.trials.iter().map(|t| t.rows).sum::<usize>() {
            return Err(Error::format(&path, "row total does not match per-trial rows"));
        }
        Ok(idx)
    }
}

/// Reads a dataset directory back into a [`Corpus`], checking that data,
/// labels and index agree.
pub fn load_corpus(dir: &Path) -> Result<(Corpus, DatasetIndex)> {
    let idx = DatasetIndex::load(dir)?;
    let data = read_npy(&dir.join(DATA_FILE))?;
    let labels = read_npy(&dir.join(LABELS_FILE))?;
    if data.dim() != (idx.rows, idx.cols) || labels.dim() != (idx.rows, N_CLASSES) {
        return Err(Error::format(
            dir,
            format!(
                "data {:?} / labels {:?} disagree with index ({}, {})",
                data.dim(),
                labels.dim(),
                idx.rows,
                idx.cols
            ),
        ));
    }
    let targets = onehot_to_targets(labels.view())?;
    let mut trial_of_row = Vec::with_capacity(idx.rows);
    for (t, trial) in idx.trials.iter().enumerate() {
        trial_of_row.extend(std::iter::repeat_n(t as u32, trial.rows));
    }
    if let Some(r) = (0..idx.rows).find(|&r| targets[r] != idx.trials[trial_of_row[r] as usize].label.code()) {
        return Err(Error::format(dir, format!("label of row {r} disagrees with its trial")));
    }
    let corpus = Corpus {
        data,
        labels,
        trial_of_row,
        trial_labels: idx.trials.iter().map(|t| t.label).collect(),
    };
    Ok((corpus, idx))
}
