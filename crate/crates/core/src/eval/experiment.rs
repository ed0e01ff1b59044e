use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::metrics::confusion_matrix;
use super::report::{EvalReport, SplitMeta};
use super::split::{split_with_mode, SplitAssignment};
use crate::config::{PipelineConfig, ScalerFit, SplitMode};
use crate::error::{Error, Result};
use crate::fusion::Corpus;
use crate::label::N_CLASSES;
use crate::nn::scaler::ScalerStats;
use crate::nn::train::{onehot_to_targets, predict_subset, train_subset, History};
use crate::nn::ModelParams;

/// Everything produced by one split/fit/train/evaluate run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub split: SplitAssignment,
    pub scaler: ScalerStats,
    pub model: ModelParams,
    pub history: History,
    pub report: EvalReport,
}

/// Scores `model` on `rows` of `data`.
pub fn evaluate(
    model: &ModelParams,
    data: ArrayView2<'_, f64>,
    targets: &[u8],
    rows: &[usize],
    scaler: Option<&ScalerStats>,
    meta: SplitMeta,
) -> Result<EvalReport> {
    let pred: Vec<u8> = predict_subset(model, data, rows, scaler)?
        .into_iter()
        .map(|l| l.code())
        .collect();
    let truth: Vec<u8> = rows.iter().map(|&r| targets[r]).collect();
    Ok(EvalReport::new(confusion_matrix(&truth, &pred)?, meta))
}

pub fn fit_scaler(data: ArrayView2<'_, f64>, split: &SplitAssignment, fit: ScalerFit) -> Result<ScalerStats> {
    match fit {
        ScalerFit::Train => ScalerStats::fit_rows(data, &split.train),
        ScalerFit::All => ScalerStats::fit_rows(data, &(0..data.nrows()).collect::<Vec<_>>()),
    }
}

/// A trained model with the split and scaler it was fit on.
#[derive(Debug, Clone)]
pub struct Trained {
    pub split: SplitAssignment,
    pub scaler: ScalerStats,
    pub model: ModelParams,
    pub history: History,
}

/// Split, standardise and train for `cfg.epochs`.
pub fn train_model(corpus: &Corpus, cfg: &PipelineConfig, mode: SplitMode) -> Result<Trained> {
    cfg.validate()?;
    let split = split_with_mode(corpus, cfg, mode)?;
    let data = corpus.data.view();
    let targets = onehot_to_targets(corpus.labels.view())?;
    let scaler = fit_scaler(data, &split, cfg.scaler_fit)?;
    log::info!(
        "{mode:?} split: {} train / {} test rows",
        split.train.len(),
        split.test.len()
    );
    let (model, history) = train_subset(data, &targets, &split.train, Some(&scaler), cfg, cfg.epochs)?;
    Ok(Trained { split, scaler, model, history })
}

/// Scores a trained model on its held-out rows.
pub fn evaluate_trained(corpus: &Corpus, trained: &Trained, train_fraction: f64) -> Result<EvalReport> {
    let targets = onehot_to_targets(corpus.labels.view())?;
    let meta = SplitMeta::of(&trained.split, train_fraction);
    evaluate(
        &trained.model,
        corpus.data.view(),
        &targets,
        &trained.split.test,
        Some(&trained.scaler),
        meta,
    )
}

/// Split, standardise, train for `cfg.epochs` and evaluate on the held-out rows.
pub fn run_experiment(corpus: &Corpus, cfg: &PipelineConfig, mode: SplitMode) -> Result<Experiment> {
    let t = train_model(corpus, cfg, mode)?;
    let report = evaluate_trained(corpus, &t, cfg.train_fraction)?;
    Ok(Experiment {
        split: t.split,
        scaler: t.scaler,
        model: t.model,
        history: t.history,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub window_accuracy: f64,
    pub trial_accuracy: f64,
    /// `window_accuracy - trial_accuracy`.
    pub gap: f64,
    pub epochs: usize,
    pub window: EvalReport,
    pub trial: EvalReport,
}

#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub window: Experiment,
    pub trial: Experiment,
    pub report: ProbeReport,
}

/// Trains identical models under window-level and trial-level splits.
///
/// Overlapping windows of one trial are near-duplicates; a window-level split
/// lets the model see neighbours of its test rows, so the gap between the two
/// accuracies measures how much of the window-mode score is leakage.
pub fn leakage_probe(corpus: &Corpus, cfg: &PipelineConfig) -> Result<ProbeOutcome> {
    let mut per_class = [0usize; N_CLASSES];
    for l in &corpus.trial_labels {
        per_class[l.index()] += 1;
    }
    if let Some(&few) = per_class.iter().find(|&&n| n < 2) {
        return Err(Error::InsufficientSamples { needed: 2, got: few });
    }
    let (window, trial) = rayon::join(
        || run_experiment(corpus, cfg, SplitMode::Window),
        || run_experiment(corpus, cfg, SplitMode::Trial),
    );
    let (window, trial) = (window?, trial?);
    let report = ProbeReport {
        window_accuracy: window.report.accuracy,
        trial_accuracy: trial.report.accuracy,
        gap: window.report.accuracy - trial.report.accuracy,
        epochs: cfg.epochs,
        window: window.report.clone(),
        trial: trial.report.clone(),
    };
    Ok(ProbeOutcome { window, trial, report })
}
