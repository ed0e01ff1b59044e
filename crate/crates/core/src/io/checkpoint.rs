//! Model checkpoint: `magic | version (u32 LE) | header length (u64 LE) |
//! JSON header | f64 LE tensors in header order`.

use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::nn::model::{ArchConfig, Layers, ModelParams, TENSOR_NAMES};
use crate::nn::scaler::ScalerStats;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"NFUSECKP";
pub const CHECKPOINT_VERSION: u32 = 1;

const SCALER_MEAN: &str = "scaler.mean";
const SCALER_STD: &str = "scaler.std";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    arch: ArchConfig,
    rng_seed: u64,
    #[serde(default)]
    config: Option<PipelineConfig>,
    #[serde(default)]
    scaler_floored: Vec<usize>,
    tensors: Vec<TensorInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ModelParams,
    pub scaler: Option<ScalerStats>,
    pub rng_seed: u64,
    /// Configuration the model was trained with, if known.
    pub config: Option<PipelineConfig>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let layers = self.model.layers();
        let mut tensors: Vec<TensorInfo> = TENSOR_NAMES
            .iter()
            .zip(layers.shapes())
            .map(|(n, s)| TensorInfo { name: n.to_string(), shape: s })
            .collect();
        let mut payload: Vec<&[f64]> = layers.tensors().to_vec();
        if let Some(s) = &self.scaler {
            for (name, arr) in [(SCALER_MEAN, &s.mean), (SCALER_STD, &s.std)] {
                tensors.push(TensorInfo { name: name.into(), shape: vec![arr.len()] });
                payload.push(arr.as_slice().expect("contiguous scaler"));
            }
        }
        let header = Header {
            arch: *self.model.arch(),
            rng_seed: self.rng_seed,
            config: self.config.clone(),
            scaler_floored: self.scaler.as_ref().map(|s| s.floored.clone()).unwrap_or_default(),
            tensors,
        };
        let json = serde_json::to_vec(&header)?;
        let n_values: usize = payload.iter().map(|t| t.len()).sum();
        let mut out = Vec::with_capacity(20 + json.len() + 8 * n_values);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for t in payload {
            for v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    /// Parses a checkpoint; `origin` only labels errors.
    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self> {
        let bad = |m: String| Error::format(origin, m);
        if bytes.len() < 20 || &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(bad("not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(bad(format!(
                "checkpoint version {version}, this build reads version {CHECKPOINT_VERSION}"
            )));
        }
        let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
        let body = bytes.get(20..).expect("length checked");
        if hlen > body.len() {
            return Err(bad("truncated header".into()));
        }
        let header: Header = serde_json::from_slice(&body[..hlen]).map_err(|e| bad(e.to_string()))?;
        header.arch.validate().map_err(|e| bad(e.to_string()))?;

        let mut layers = Layers::zeros(&header.arch);
        let expected_shapes = layers.shapes();
        let mut data = body[hlen..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        if !(body.len() - hlen).is_multiple_of(8) {
            return Err(bad("payload is not a whole number of f64 values".into()));
        }
        let mut infos = header.tensors.iter();
        for (i, dst) in layers.tensors_mut().into_iter().enumerate() {
            let info = infos
                .next()
                .ok_or_else(|| bad(format!("missing tensor {}", TENSOR_NAMES[i])))?;
            if info.name != TENSOR_NAMES[i] || info.shape != expected_shapes[i] {
                return Err(bad(format!(
                    "tensor {} {:?} does not match architecture ({} {:?})",
                    info.name, info.shape, TENSOR_NAMES[i], expected_shapes[i]
                )));
            }
            for v in dst.iter_mut() {
                *v = data.next().ok_or_else(|| bad("truncated tensor data".into()))?;
            }
        }
        let rest: Vec<&TensorInfo> = infos.collect();
        let scaler = match rest.as_slice() {
            [] => None,
            [m, s] if m.name == SCALER_MEAN && s.name == SCALER_STD && m.shape == s.shape && m.shape.len() == 1 => {
                let n = m.shape[0];
                if n != header.arch.input_len {
                    return Err(bad(format!(
                        "scaler width {n} does not match input length {}",
                        header.arch.input_len
                    )));
                }
                let mut take = |what: &str| -> Result<Array1<f64>> {
                    let v: Vec<f64> = data.by_ref().take(n).collect();
                    if v.len() != n {
                        return Err(bad(format!("truncated {what}")));
                    }
                    Ok(Array1::from(v))
                };
                let mean = take(SCALER_MEAN)?;
                let std = take(SCALER_STD)?;
                Some(ScalerStats { mean, std, floored: header.scaler_floored.clone() })
            }
            _ => return Err(bad("unexpected trailing tensors".into())),
        };
        if data.next().is_some() {
            return Err(bad("trailing data after tensors".into()));
        }
        Ok(Checkpoint {
            model: ModelParams::from_layers(header.arch, layers)?,
            scaler,
            rng_seed: header.rng_seed,
            config: header.config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::scaler::scaler_fit;
    use ndarray::Array2;

    fn small() -> ArchConfig {
        ArchConfig {
            input_len: 20,
            conv1_filters: 2,
            conv1_kernel: 3,
            pool1: 2,
            conv2_filters: 3,
            conv2_kernel: 3,
            pool2: 2,
            dense_units: 4,
            n_classes: 5,
        }
    }

    fn sample() -> Checkpoint {
        let x = Array2::from_shape_fn((6, 20), |(r, c)| (r * c) as f64 * 0.1 + (c % 3) as f64);
        Checkpoint {
            model: ModelParams::init(small(), 4).unwrap(),
            scaler: Some(scaler_fit(x.view()).unwrap()),
            rng_seed: 4,
            config: None,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        let bytes = c.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes, Path::new("mem")).unwrap();
        assert_eq!(back.model.layers(), c.model.layers());
        assert_eq!(back.scaler, c.scaler);
        assert_eq!(back.to_bytes().unwrap(), bytes);
        let none = Checkpoint { scaler: None, ..c };
        let back = Checkpoint::from_bytes(&none.to_bytes().unwrap(), Path::new("mem")).unwrap();
        assert!(back.scaler.is_none());
    }

    #[test]
    fn version_and_magic_mismatch_rejected() {
        let mut bytes = sample().to_bytes().unwrap();
        bytes[8] = 2;
        assert!(matches!(Checkpoint::from_bytes(&bytes, Path::new("m")), Err(Error::Format { .. })));
        let mut bytes = sample().to_bytes().unwrap();
        bytes[0] = b'X';
        assert!(Checkpoint::from_bytes(&bytes, Path::new("m")).is_err());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let bytes = sample().to_bytes().unwrap();
        let hlen = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let header = String::from_utf8(bytes[20..20 + hlen].to_vec()).unwrap();
        // Claim a wider dense layer than the payload holds.
        let forged = header.replacen("\"dense_units\":4", "\"dense_units\":5", 1);
        assert_ne!(forged, header);
        let mut out = bytes[..12].to_vec();
        out.extend_from_slice(&(forged.len() as u64).to_le_bytes());
        out.extend_from_slice(forged.as_bytes());
        out.extend_from_slice(&bytes[20 + hlen..]);
        assert!(matches!(Checkpoint::from_bytes(&out, Path::new("m")), Err(Error::Format { .. })));
    }

    #[test]
    fn truncation_rejected() {
        let bytes = sample().to_bytes().unwrap();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 8], Path::new("m")).is_err());
        let mut longer = bytes.clone();
        longer.extend_from_slice(&[0; 8]);
        assert!(Checkpoint::from_bytes(&longer, Path::new("m")).is_err());
    }
}
