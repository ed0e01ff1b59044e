use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use neurofuse::synth::SynthSpec;

use crate::settings::{Preset, ScalerFitArg, SplitArg};

#[derive(Debug, Parser)]
#[command(name = "neurofuse", version, about = "Multimodal EEG emotion recognition pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Pipeline configuration JSON; individual flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for synthesis, splitting, initialisation and shuffling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// FFT window length in samples.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Hop between windows in samples.
    #[arg(long, global = true)]
    pub hop: Option<usize>,
    /// Comma-separated power band edges in Hz, e.g. 0.5,4,7,12,16,30,100.
    #[arg(long, global = true)]
    pub bands: Option<String>,
    #[arg(long, value_enum, global = true)]
    pub split: Option<SplitArg>,
    #[arg(long, global = true)]
    pub train_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    /// Rows the standardisation statistics are fit on.
    #[arg(long, value_enum, global = true)]
    pub scaler_fit: Option<ScalerFitArg>,
    /// Split each class separately.
    #[arg(long, global = true)]
    pub stratify: bool,
    #[arg(long, value_enum, global = true)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub participants: Option<u32>,
    #[arg(long)]
    pub sessions: Option<u8>,
    #[arg(long)]
    pub trials_per_session: Option<u8>,
    /// Trial length in seconds.
    #[arg(long)]
    pub seconds: Option<f64>,
    #[arg(long)]
    pub noise_level: Option<f64>,
    /// Disable the slow within-trial amplitude drift.
    #[arg(long)]
    pub no_drift: bool,
}

impl SynthArgs {
    pub fn apply(&self, spec: &mut SynthSpec) {
        if let Some(p) = self.participants {
            spec.n_participants = p;
        }
        if let Some(s) = self.sessions {
            spec.n_sessions = s;
        }
        if let Some(t) = self.trials_per_session {
            spec.trials_per_session = t;
        }
        if let Some(s) = self.seconds {
            spec.trial_seconds = s;
        }
        if let Some(n) = self.noise_level {
            spec.noise_level = n;
        }
        if self.no_drift {
            spec.drift = false;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus (raw EEG, eye features, manifest).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Extract power-spectrum and DE features for every trial of a corpus.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Align and stack features into one dataset (data, labels, index).
    Fuse {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory written by `extract`.
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the classifier on a fused dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint on its held-out split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also train under both split modes and report the accuracy gap.
        #[arg(long)]
        probe: bool,
    },
    /// Synthesise, extract, fuse, train and evaluate in one run.
    Pipeline {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        probe: bool,
        #[command(flatten)]
        synth: SynthArgs,
    },
}
