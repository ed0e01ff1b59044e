use std::path::Path;

use anyhow::{Context, Result};
use neurofuse::eval::train_model;
use neurofuse::io::{load_corpus, Checkpoint};
use neurofuse::PipelineConfig;

use super::{create_dir, write_json, CHECKPOINT_FILE, HISTORY_FILE};

pub fn cmd_train(cfg: &PipelineConfig, dataset: &Path, out: &Path) -> Result<()> {
    let (corpus, _) = load_corpus(dataset).with_context(|| format!("loading dataset {}", dataset.display()))?;
    let t = train_model(&corpus, cfg, cfg.split_mode)?;
    create_dir(out)?;
    Checkpoint {
        model: t.model,
        scaler: Some(t.scaler),
        rng_seed: cfg.rng_seed,
        config: Some(cfg.clone()),
    }
    .save(&out.join(CHECKPOINT_FILE))?;
    write_json(&out.join(HISTORY_FILE), &t.history)?;
    match t.history.epochs.last() {
        Some(last) => println!(
            "trained {} epochs on {} rows: loss {:.4}, train accuracy {:.4}",
            last.epoch,
            t.split.train.len(),
            last.mean_loss,
            last.train_accuracy
        ),
        None => println!("0 epochs requested; saved the initial model"),
    }
    println!("checkpoint: {}", out.join(CHECKPOINT_FILE).display());
    Ok(())
}
