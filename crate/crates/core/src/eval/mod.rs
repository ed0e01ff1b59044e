//! Train/test splitting, classification metrics and the split-leakage probe.

pub mod experiment;
pub mod metrics;
pub mod report;
pub mod split;

pub use experiment::{
    evaluate, evaluate_trained, fit_scaler, leakage_probe, run_experiment, train_model, Experiment, ProbeOutcome,
    ProbeReport, Trained,
};
pub use metrics::{confusion_from_labels, confusion_matrix, prf1, ClassMetrics, ConfusionMatrix, Ratio};
pub use report::{thousands, EvalReport, SplitMeta};
pub use split::{split, split_rows, split_trials, split_with_mode, train_size, SplitAssignment};
