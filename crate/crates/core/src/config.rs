use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ArchConfig;

/// Ascending band edges; consecutive pairs form half-open bands `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BandSpec {
    edges: Vec<f64>,
}

impl BandSpec {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidBand(format!(
                "need at least two edges, got {}",
                edges.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return Err(Error::InvalidBand(format!(
                "edges must be finite and > 0: {edges:?}"
            )));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBand(format!(
                "edges must be strictly ascending: {edges:?}"
            )));
        }
        Ok(BandSpec { edges })
    }

    /// The six analysis bands used for band power: 0.5, 4, 7, 12, 16, 30, 100 Hz.
    pub fn power_default() -> Self {
        BandSpec {
            edges: vec![0.5, 4.0, 7.0, 12.0, 16.0, 30.0, 100.0],
        }
    }

    /// delta / theta / alpha / beta / gamma as conventionally used for DE features.
    pub fn de_default() -> Self {
        BandSpec {
            edges: vec![1.0, 4.0, 8.0, 14.0, 31.0, 51.0],
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn n_bands(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn bands(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.edges.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn band(&self, b: usize) -> (f64, f64) {
        (self.edges[b], self.edges[b + 1])
    }

    /// Index of the band containing `f`, if any.
    pub fn locate(&self, f: f64) -> Option<usize> {
        self.bands().position(|(lo, hi)| lo <= f && f < hi)
    }

    pub fn upper(&self) -> f64 {
        *self.edges.last().expect("at least two edges")
    }
}

impl TryFrom<Vec<f64>> for BandSpec {
    type Error = Error;

    fn try_from(edges: Vec<f64>) -> Result<Self> {
        BandSpec::new(edges)
    }
}

impl From<BandSpec> for Vec<f64> {
    fn from(b: BandSpec) -> Vec<f64> {
        b.edges
    }
}

impl std::str::FromStr for BandSpec {
    type Err = Error;

    /// Parses a comma separated edge list such as `0.5,4,7,12,16,30,100`.
    fn from_str(s: &str) -> Result<Self> {
        let edges = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidBand(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        BandSpec::new(edges)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Uniform random split over individual windows.
    #[default]
    Window,
    /// Whole trials go to one side.
    Trial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalerFit {
    /// Fit standardisation statistics on training rows only.
    #[default]
    Train,
    /// Fit on every row (train and test), for replication experiments.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub window_len: usize,
    pub hop: usize,
    pub band_edges: BandSpec,
    pub de_bands: BandSpec,
    pub de_segment_seconds: f64,
    pub de_sampling_rate: f64,
    pub bandpass: (f64, f64),
    pub train_fraction: f64,
    pub batch_size: usize,
    pub rng_seed: u64,
    pub split_mode: SplitMode,
    pub stratify: bool,
    pub scaler_fit: ScalerFit,
    pub epochs: usize,
    pub learning_rate: f64,
    pub arch: ArchConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_len: 200,
            hop: 50,
            band_edges: BandSpec::power_default(),
            de_bands: BandSpec::de_default(),
            de_segment_seconds: 4.0,
            de_sampling_rate: 200.0,
            bandpass: (1.0, 75.0),
            train_fraction: 0.7,
            batch_size: 1000,
            rng_seed: 0,
            split_mode: SplitMode::Window,
            stratify: false,
            scaler_fit: ScalerFit::Train,
            epochs: 10,
            learning_rate: 1e-3,
            arch: ArchConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.window_len < 2 {
            return bad(format!("window_len must be >= 2, got {}", self.window_len));
        }
        if self.hop == 0 || self.hop > self.window_len {
            return bad(format!(
                "hop must satisfy 0 < hop <= window_len ({}), got {}",
                self.window_len, self.hop
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !(self.de_segment_seconds > 0.0 && self.de_segment_seconds.is_finite()) {
            return bad(format!(
                "de_segment_seconds must be > 0, got {}",
                self.de_segment_seconds
            ));
        }
        if !(self.de_sampling_rate > 0.0 && self.de_sampling_rate.is_finite()) {
            return bad(format!(
                "de_sampling_rate must be > 0, got {}",
                self.de_sampling_rate
            ));
        }
        let (lo, hi) = self.bandpass;
        if !(lo > 0.0 && lo < hi && hi < self.de_sampling_rate / 2.0) {
            return bad(format!(
                "bandpass must satisfy 0 < low < high < {} Hz, got ({lo}, {hi})",
                self.de_sampling_rate / 2.0
            ));
        }
        if self.de_bands.upper() >= self.de_sampling_rate / 2.0 {
            return bad(format!(
                "DE band edge {} reaches Nyquist of {} Hz",
                self.de_bands.upper(),
                self.de_sampling_rate
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        // BandSpec invariants hold by construction; re-check in case of direct edits.
        BandSpec::new(self.band_edges.edges().to_vec())?;
        BandSpec::new(self.de_bands.edges().to_vec())?;
        self.arch.validate()
    }

    /// Width of a fused `[PS | DE | EYE]` row under these band settings.
    pub fn fused_cols(&self) -> usize {
        use crate::types::{DE_CHANNELS, EYE_FEATURES, FFT_CHANNELS};
        FFT_CHANNELS * self.band_edges.n_bands() + DE_CHANNELS * self.de_bands.n_bands() + EYE_FEATURES
    }

    /// Samples per DE segment at the downsampled rate.
    pub fn de_segment_len(&self) -> usize {
        (self.de_segment_seconds * self.de_sampling_rate).round() as usize
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
