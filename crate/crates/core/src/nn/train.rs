use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamHyper, AdamState};
use super::loss::row_losses;
use super::model::{backward_accumulate, forward, Layers, ModelParams};
use super::scaler::ScalerStats;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::label::{argmax, EmotionLabel, N_CLASSES};
use crate::rng::{derive_seed, seeded_rng};

/// Rows per forward/backward pass inside a mini-batch. Gradients are summed
/// across micro-batches, so the update equals one pass over the full batch.
pub const MICRO_BATCH: usize = 50;

const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochStats>,
}

/// Class index of every one-hot row.
pub fn onehot_to_targets(labels: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
    if labels.ncols() != N_CLASSES {
        return Err(Error::Shape(format!(
            "label matrix has {} columns, expected {N_CLASSES}",
            labels.ncols()
        )));
    }
    Ok(labels
        .rows()
        .into_iter()
        .map(|r| argmax(r.as_slice().unwrap_or(&r.to_vec())) as u8)
        .collect())
}

/// Copies `rows` of `data` into a dense batch, standardising on the way.
fn gather(
    data: ArrayView2<'_, f64>,
    rows: &[usize],
    scaler: Option<&ScalerStats>,
) -> Array2<f64> {
    let mut x = Array2::zeros((rows.len(), data.ncols()));
    for (dst, &r) in x.rows_mut().into_iter().zip(rows) {
        match scaler {
            Some(s) => s.transform_row_into(data.row(r), dst),
            None => {
                let mut dst = dst;
                dst.assign(&data.row(r));
            }
        }
    }
    x
}

fn onehot_batch(targets: &[u8], rows: &[usize]) -> Array2<f64> {
    let mut y = Array2::zeros((rows.len(), N_CLASSES));
    for (i, &r) in rows.iter().enumerate() {
        y[[i, targets[r] as usize]] = 1.0;
    }
    y
}

/// Mini-batch Adam on every row of `data` (already standardised).
pub fn train(
    data: ArrayView2<'_, f64>,
    labels: ArrayView2<'_, f64>,
    cfg: &PipelineConfig,
    epochs: usize,
) -> Result<(ModelParams, History)> {
    if data.nrows() != labels.nrows() {
        return Err(Error::Shape(format!(
            "{} data rows vs {} label rows",
            data.nrows(),
            labels.nrows()
        )));
    }
    let targets = onehot_to_targets(labels)?;
    let rows: Vec<usize> = (0..data.nrows()).collect();
    train_subset(data, &targets, &rows, None, cfg, epochs)
}

/// Trains on `rows` of `data`, standardising each gathered batch with `scaler`.
pub fn train_subset(
    data: ArrayView2<'_, f64>,
    targets: &[u8],
    rows: &[usize],
    scaler: Option<&ScalerStats>,
    cfg: &PipelineConfig,
    epochs: usize,
) -> Result<(ModelParams, History)> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(Error::Empty("no training rows".into()));
    }
    if targets.len() != data.nrows() {
        return Err(Error::Shape(format!(
            "{} targets for {} rows",
            targets.len(),
            data.nrows()
        )));
    }
    if let Some(&bad) = targets.iter().find(|&&t| t as usize >= N_CLASSES) {
        return Err(Error::InvalidLabel(i64::from(bad)));
    }
    if let Some(s) = scaler {
        s.check_width(data.ncols())?;
    }
    let mut model = ModelParams::init(cfg.arch, derive_seed(cfg.rng_seed, INIT_STREAM))?;
    if data.ncols() != cfg.arch.input_len {
        return Err(Error::Shape(format!(
            "data has {} columns, model expects {}",
            data.ncols(),
            cfg.arch.input_len
        )));
    }
    let hyper = AdamHyper {
        lr: cfg.learning_rate,
        ..AdamHyper::default()
    };
    let mut adam = AdamState::new(&model, hyper);
    let mut grads = Layers::zeros(model.arch());
    let mut rng = seeded_rng(derive_seed(cfg.rng_seed, SHUFFLE_STREAM));
    let mut order = rows.to_vec();
    let mut history = History::default();

    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            grads.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            for micro in batch.chunks(MICRO_BATCH) {
                let x = gather(data, micro, scaler);
                let y = onehot_batch(targets, micro);
                let (probs, cache) = forward(&model, x.view())?;
                loss_sum += row_losses(probs.view(), y.view()).iter().sum::<f64>();
                correct += probs
                    .rows()
                    .into_iter()
                    .zip(micro)
                    .filter(|(p, &r)| argmax(p.as_slice().expect("row-major")) == targets[r] as usize)
                    .count();
                backward_accumulate(&model, &cache, y.view(), scale, &mut grads)?;
            }
            if !loss_sum.is_finite() {
                return Err(Error::NonFinite(format!("training loss in epoch {}", epoch + 1)));
            }
            adam_step(&mut model, &grads, &mut adam)?;
        }
        let stats = EpochStats {
            epoch: epoch + 1,
            mean_loss: loss_sum / order.len() as f64,
            train_accuracy: correct as f64 / order.len() as f64,
        };
        log::info!(
            "epoch {}: loss {:.6}, train accuracy {:.4}",
            stats.epoch,
            stats.mean_loss,
            stats.train_accuracy
        );
        history.epochs.push(stats);
    }
    Ok((model, history))
}

const PREDICT_CHUNK: usize = 200;

/// Argmax class per row; ties go to the lower code.
pub fn predict(model: &ModelParams, data: ArrayView2<'_, f64>) -> Result<Vec<EmotionLabel>> {
    let rows: Vec<usize> = (0..data.nrows()).collect();
    predict_subset(model, data, &rows, None)
}

pub fn predict_subset(
    model: &ModelParams,
    data: ArrayView2<'_, f64>,
    rows: &[usize],
    scaler: Option<&ScalerStats>,
) -> Result<Vec<EmotionLabel>> {
    if data.ncols() != model.arch().input_len {
        return Err(Error::Shape(format!(
            "data has {} columns, model expects {}",
            data.ncols(),
            model.arch().input_len
        )));
    }
    if let Some(s) = scaler {
        s.check_width(data.ncols())?;
    }
    let mut out = Vec::with_capacity(rows.len());
    for chunk in rows.chunks(PREDICT_CHUNK) {
        let x = gather(data, chunk, scaler);
        let (probs, _) = forward(model, x.view())?;
        for p in probs.rows() {
            let code = argmax(p.as_slice().expect("row-major"));
            out.push(EmotionLabel::ALL[code]);
        }
    }
    Ok(out)
}

/// Label of the largest probability in each row; ties go to the lower code.
pub fn probs_to_labels(probs: ArrayView2<'_, f64>) -> Vec<EmotionLabel> {
    probs
        .rows()
        .into_iter()
        .map(|r| EmotionLabel::ALL[argmax(&r.to_vec())])
        .collect()
}
