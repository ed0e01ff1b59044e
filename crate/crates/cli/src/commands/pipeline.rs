use std::path::Path;

use anyhow::Result;
use neurofuse::eval::{leakage_probe, run_experiment, Experiment};
use neurofuse::io::Checkpoint;
use neurofuse::pipeline::{extract_trial, synth_corpus};
use neurofuse::synth::{generate_planned, plan_corpus};
use serde::Serialize;

use super::{
    create_dir, write_json, write_probe, write_report, CHECKPOINT_FILE, HISTORY_FILE, SUMMARY_FILE,
};
use crate::settings::Settings;

/// Per-trial matrix shapes at each stage, measured on the first trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageShapes {
    pub raw: [usize; 2],
    pub power_spectrum: [usize; 2],
    pub de: [usize; 2],
    pub eye: [usize; 2],
    pub fused: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub settings: Settings,
    pub trials: usize,
    pub rows: usize,
    pub cols: usize,
    pub stages: StageShapes,
    pub train_rows: usize,
    pub test_rows: usize,
    pub accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_gap: Option<f64>,
}

fn stage_shapes(s: &Settings) -> Result<StageShapes> {
    let plan = plan_corpus(&s.spec)?;
    let (key, label) = plan[0];
    let (raw, eye) = generate_planned(&s.spec, key, label)?;
    let f = extract_trial(&raw, &eye, &s.cfg)?;
    let dim = |m: &neurofuse::FeatureMatrix| [m.nrows(), m.ncols()];
    Ok(StageShapes {
        raw: [raw.n_channels(), raw.n_samples()],
        power_spectrum: dim(&f.ps),
        de: dim(&f.de),
        eye: dim(&eye),
        fused: dim(&f.fused),
    })
}

/// Synthesise, extract, fuse, train and evaluate in memory. All outputs are
/// deterministic given the settings; nothing is printed.
pub fn cmd_pipeline(s: &Settings, out: &Path, probe: bool) -> Result<Summary> {
    let stages = stage_shapes(s)?;
    let corpus = synth_corpus(&s.spec, &s.cfg)?;
    log::info!("corpus: {} rows x {} cols", corpus.n_rows(), corpus.data.ncols());
    let (exp, probe_report): (Experiment, _) = if probe {
        let p = leakage_probe(&corpus, &s.cfg)?;
        let main = match s.cfg.split_mode {
            neurofuse::SplitMode::Window => p.window,
            neurofuse::SplitMode::Trial => p.trial,
        };
        (main, Some(p.report))
    } else {
        (run_experiment(&corpus, &s.cfg, s.cfg.split_mode)?, None)
    };

    create_dir(out)?;
    Checkpoint {
        model: exp.model,
        scaler: Some(exp.scaler),
        rng_seed: s.cfg.rng_seed,
        config: Some(s.cfg.clone()),
    }
    .save(&out.join(CHECKPOINT_FILE))?;
    write_json(&out.join(HISTORY_FILE), &exp.history)?;
    write_report(out, &exp.report)?;
    if let Some(p) = &probe_report {
        write_probe(out, p)?;
    }
    let summary = Summary {
        settings: s.clone(),
        trials: corpus.n_trials(),
        rows: corpus.n_rows(),
        cols: corpus.data.ncols(),
        stages,
        train_rows: exp.split.train.len(),
        test_rows: exp.split.test.len(),
        accuracy: exp.report.accuracy,
        probe_gap: probe_report.map(|p| p.gap),
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}
