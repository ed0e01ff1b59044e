use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::EmotionLabel;

/// Rows in a raw recording used for the power-spectrum stream.
pub const FFT_CHANNELS: usize = 66;
/// Leading rows used for differential entropy (the 62-electrode cap).
pub const DE_CHANNELS: usize = 62;
pub const EYE_FEATURES: usize = 33;

pub const PS_COLS: usize = FFT_CHANNELS * 6;
pub const DE_COLS: usize = DE_CHANNELS * 5;
pub const FUSED_COLS: usize = PS_COLS + DE_COLS + EYE_FEATURES;

/// Identity of one film-clip trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrialKey {
    pub participant: u32,
    pub session: u8,
    pub trial: u8,
}

impl TrialKey {
    pub fn new(participant: u32, session: u8, trial: u8) -> Result<Self> {
        if participant == 0 {
            return Err(Error::InvalidConfig("participant ids start at 1".into()));
        }
        if !(1..=3).contains(&session) {
            return Err(Error::InvalidConfig(format!(
                "session must be in 1..=3, got {session}"
            )));
        }
        if !(1..=15).contains(&trial) {
            return Err(Error::InvalidConfig(format!(
                "trial index must be in 1..=15, got {trial}"
            )));
        }
        Ok(TrialKey {
            participant,
            session,
            trial,
        })
    }

    /// File stem `<participant>_<session>_<trial>`.
    pub fn stem(&self) -> String {
        format!("{}_{}_{}", self.participant, self.session, self.trial)
    }
}

/// Channel-major recording of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrial {
    pub key: TrialKey,
    pub label: EmotionLabel,
    pub sampling_rate: f64,
    samples: Array2<f64>,
}

impl RawTrial {
    pub fn new(
        key: TrialKey,
        label: EmotionLabel,
        sampling_rate: f64,
        samples: Array2<f64>,
    ) -> Result<Self> {
        if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sampling rate must be > 0, got {sampling_rate}"
            )));
        }
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::Empty("raw trial has no samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("raw trial {}", key.stem())));
        }
        Ok(RawTrial {
            key,
            label,
            sampling_rate,
            samples,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.ncols()
    }

    pub fn samples(&self) -> ArrayView2<'_, f64> {
        self.samples.view()
    }

    pub fn channel(&self, c: usize) -> ArrayView1<'_, f64> {
        self.samples.row(c)
    }

    pub fn into_samples(self) -> Array2<f64> {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    PowerSpectrum,
    De,
    Eye,
    Fused,
}

impl FeatureKind {
    /// Width under the default channel and band layout.
    pub fn default_cols(self) -> usize {
        match self {
            FeatureKind::PowerSpectrum => PS_COLS,
            FeatureKind::De => DE_COLS,
            FeatureKind::Eye => EYE_FEATURES,
            FeatureKind::Fused => FUSED_COLS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::PowerSpectrum => "power_spectrum",
            FeatureKind::De => "de",
            FeatureKind::Eye => "eye",
            FeatureKind::Fused => "fused",
        }
    }
}

/// Rows are time windows (or segments), columns are feature dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Array2<f64>,
    kind: FeatureKind,
    /// Duration covered by one row, in seconds, when known.
    pub row_seconds: Option<f64>,
    pub col_names: Option<Vec<String>>,
}

impl FeatureMatrix {
    pub fn new(kind: FeatureKind, data: Array2<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{} feature matrix", kind.name())));
        }
        Ok(FeatureMatrix {
            data,
            kind,
            row_seconds: None,
            col_names: None,
        })
    }

    pub fn with_row_seconds(mut self, s: f64) -> Self {
        self.row_seconds = Some(s);
        self
    }

    pub fn with_col_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.ncols() {
            return Err(Error::Shape(format!(
                "{} column names for {} columns",
                names.len(),
                self.ncols()
            )));
        }
        self.col_names = Some(names);
        Ok(self)
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.index_axis(Axis(0), i)
    }
}
