use std::path::Path;

use anyhow::{Context, Result};
use neurofuse::eval::{evaluate, leakage_probe, split_with_mode, SplitMeta};
use neurofuse::io::{load_corpus, Checkpoint};
use neurofuse::nn::train::onehot_to_targets;
use neurofuse::{PipelineConfig, SplitMode};

use super::{create_dir, probe_table, write_probe, write_report};

/// Split flags given explicitly on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitOverrides {
    pub mode: Option<SplitMode>,
    pub train_fraction: Option<f64>,
    pub stratify: bool,
    pub seed: Option<u64>,
}

impl SplitOverrides {
    fn is_empty(&self) -> bool {
        *self == SplitOverrides::default()
    }

    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(m) = self.mode {
            cfg.split_mode = m;
        }
        if let Some(f) = self.train_fraction {
            cfg.train_fraction = f;
        }
        if self.stratify {
            cfg.stratify = true;
        }
        if let Some(s) = self.seed {
            cfg.rng_seed = s;
        }
    }
}

/// Scores a checkpoint on the held-out side of the split it was trained
/// with. `fallback` is used when the checkpoint records no configuration;
/// `overrides` replace the recorded split settings.
pub fn cmd_eval(
    fallback: &PipelineConfig,
    overrides: &SplitOverrides,
    checkpoint: &Path,
    dataset: &Path,
    out: &Path,
    probe: bool,
) -> Result<()> {
    let ckpt = Checkpoint::load(checkpoint).with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    let mut cfg = ckpt.config.clone().unwrap_or_else(|| fallback.clone());
    if ckpt.config.is_some() && !overrides.is_empty() {
        log::warn!("split flags differ from training; test rows may overlap the rows the model was fit on");
    }
    overrides.apply(&mut cfg);
    cfg.validate()?;
    let (corpus, _) = load_corpus(dataset).with_context(|| format!("loading dataset {}", dataset.display()))?;
    let split = split_with_mode(&corpus, &cfg, cfg.split_mode)?;
    let targets = onehot_to_targets(corpus.labels.view())?;
    let report = evaluate(
        &ckpt.model,
        corpus.data.view(),
        &targets,
        &split.test,
        ckpt.scaler.as_ref(),
        SplitMeta::of(&split, cfg.train_fraction),
    )?;
    create_dir(out)?;
    write_report(out, &report)?;
    print!("{}", report.to_table());
    if probe {
        let p = leakage_probe(&corpus, &cfg)?;
        write_probe(out, &p.report)?;
        print!("\n{}", probe_table(&p.report));
    }
    Ok(())
}
