//! Multimodal EEG emotion recognition.
//!
//! ```text
//! raw EEG (66 x N @ 1 kHz) ── sliding windows ── band power ──────┐
//!        └─ 1-75 Hz band-pass ── /5 ── 5 bands ── DE per 4 s ──── repeat rows ─┤
//! eye features (33 per 4 s) ─────────────────────────── repeat rows ─┴─ [PS | DE | EYE]
//!                                                                          │
//!                                       standardise ── 1D-CNN ── softmax (5 emotions)
//! ```

pub mod config;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod label;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod types;

pub use config::{BandSpec, PipelineConfig, ScalerFit, SplitMode};
pub use error::{Error, ErrorClass, Result};
pub use label::{label_to_onehot, EmotionLabel, N_CLASSES};
pub use types::{FeatureKind, FeatureMatrix, RawTrial, TrialKey};
