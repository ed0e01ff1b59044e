use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use neurofuse::synth::SynthSpec;
use neurofuse::{PipelineConfig, ScalerFit, SplitMode};
use serde::Serialize;

use crate::args::{GlobalArgs, SynthArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 16 participants, 72 s trials, W=200, H=50: the full-size corpus shapes.
    PaperShape,
    /// 4 participants; the learnability benchmark.
    Small,
    /// 1 participant, 1 session, 8 s trials, 2 epochs; for smoke runs.
    Tiny,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Window,
    Trial,
}

impl From<SplitArg> for SplitMode {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Window => SplitMode::Window,
            SplitArg::Trial => SplitMode::Trial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalerFitArg {
    Train,
    All,
}

impl From<ScalerFitArg> for ScalerFit {
    fn from(s: ScalerFitArg) -> Self {
        match s {
            ScalerFitArg::Train => ScalerFit::Train,
            ScalerFitArg::All => ScalerFit::All,
        }
    }
}

/// Fully resolved configuration for one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub preset: Preset,
    pub cfg: PipelineConfig,
    pub spec: SynthSpec,
}

impl Preset {
    pub fn settings(self) -> Settings {
        let cfg = PipelineConfig::default();
        let spec = SynthSpec::default();
        let (cfg, spec) = match self {
            Preset::PaperShape => (cfg, spec),
            Preset::Small => (cfg, SynthSpec::small()),
            Preset::Tiny => (
                PipelineConfig {
                    epochs: 2,
                    batch_size: 100,
                    ..cfg
                },
                SynthSpec {
                    n_participants: 1,
                    n_sessions: 1,
                    trial_seconds: 8.0,
                    ..spec
                },
            ),
        };
        Settings { preset: self, cfg, spec }
    }
}

/// Preset, then `--config`, then individual flags.
pub fn resolve(g: &GlobalArgs, synth: Option<&SynthArgs>, default_preset: Preset) -> Result<Settings> {
    let mut s = g.preset.unwrap_or(default_preset).settings();
    if let Some(path) = &g.config {
        s.cfg = load_config(path)?;
    }
    let c = &mut s.cfg;
    if let Some(seed) = g.seed {
        c.rng_seed = seed;
        s.spec.rng_seed = seed;
    }
    if let Some(w) = g.window {
        c.window_len = w;
    }
    if let Some(h) = g.hop {
        c.hop = h;
    }
    if let Some(b) = &g.bands {
        c.band_edges = b.parse()?;
    }
    if let Some(m) = g.split {
        c.split_mode = m.into();
    }
    if let Some(f) = g.train_fraction {
        c.train_fraction = f;
    }
    if let Some(b) = g.batch_size {
        c.batch_size = b;
    }
    if let Some(e) = g.epochs {
        c.epochs = e;
    }
    if let Some(f) = g.scaler_fit {
        c.scaler_fit = f.into();
    }
    if g.stratify {
        c.stratify = true;
    }
    c.arch.input_len = c.fused_cols();
    if let Some(a) = synth {
        a.apply(&mut s.spec);
    }
    s.cfg.validate()?;
    s.spec.validate()?;
    Ok(s)
}

fn load_config(path: &Path) -> Result<PipelineConfig> {
    PipelineConfig::from_json_file(path).with_context(|| format!("loading config {}", path.display()))
}
