use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_CLASSES: usize = 5;

/// Five-way emotion label. Codes follow the published class table:
/// disgust=0, fear=1, sad=2, neutral=3, happy=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum EmotionLabel {
    Disgust = 0,
    Fear = 1,
    Sad = 2,
    Neutral = 3,
    Happy = 4,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; N_CLASSES] = [
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Sad,
        EmotionLabel::Neutral,
        EmotionLabel::Happy,
    ];

    pub fn from_code(code: i64) -> Result<Self> {
        usize::try_from(code)
            .ok()
            .and_then(|c| Self::ALL.get(c).copied())
            .ok_or(Error::InvalidLabel(code))
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Disgust => "Disgust",
            EmotionLabel::Fear => "Fear",
            EmotionLabel::Sad => "Sad",
            EmotionLabel::Neutral => "Neutral",
            EmotionLabel::Happy => "Happy",
        }
    }

    pub fn onehot(self) -> [f64; N_CLASSES] {
        let mut v = [0.0; N_CLASSES];
        v[self.index()] = 1.0;
        v
    }
}

impl TryFrom<u8> for EmotionLabel {
    type Error = Error;

    fn try_from(code: u8) -> Result<Self> {
        Self::from_code(i64::from(code))
    }
}

impl From<EmotionLabel> for u8 {
    fn from(l: EmotionLabel) -> u8 {
        l.code()
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {}", self.name(), self.code())
    }
}

/// One-hot encoding of a raw label code.
pub fn label_to_onehot(code: i64) -> Result<[f64; N_CLASSES]> {
    EmotionLabel::from_code(code).map(EmotionLabel::onehot)
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}
