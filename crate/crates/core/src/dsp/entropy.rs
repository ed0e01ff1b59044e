//! Differential entropy of band-limited segments.
//!
//! For a Gaussian segment `DE = 0.5 * ln(2 pi e sigma^2)`, with `sigma^2` the
//! unbiased (n - 1) sample variance.

use std::f64::consts::{E, PI};

use ndarray::Array2;
use rayon::prelude::*;

use super::filter::{bandpass, downsample, BandSplitter};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::types::{FeatureKind, FeatureMatrix, RawTrial, DE_CHANNELS};

/// Variance substituted for (near-)constant segments.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub value: f64,
    /// The segment variance was below [`VARIANCE_FLOOR`].
    pub floored: bool,
}

pub fn differential_entropy(segment: &[f64]) -> Result<Entropy> {
    let n = segment.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let mean = segment.iter().sum::<f64>() / n as f64;
    let var = segment.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    if !var.is_finite() {
        return Err(Error::NonFinite("segment variance".into()));
    }
    let floored = var < VARIANCE_FLOOR;
    let var = var.max(VARIANCE_FLOOR);
    Ok(Entropy {
        value: 0.5 * (2.0 * PI * E * var).ln(),
        floored,
    })
}

/// Integer decimation factor from `fs` to `target`.
fn decimation(fs: f64, target: f64) -> Result<usize> {
    let ratio = fs / target;
    let factor = ratio.round();
    if factor < 1.0 || (ratio - factor).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "sampling rate {fs} Hz is not an integer multiple of {target} Hz"
        )));
    }
    Ok(factor as usize)
}

/// DE features over non-overlapping segments.
///
/// Per channel: band-pass to the broad EEG range, decimate to the DE rate,
/// split into the DE bands, then take the DE of each segment. Uses the first
/// 62 rows of the recording; columns are channel-major (channel x band).
pub fn extract_de(trial: &RawTrial, cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    if trial.n_channels() < DE_CHANNELS {
        return Err(Error::Shape(format!(
            "DE needs at least {DE_CHANNELS} channels, trial {} has {}",
            trial.key.stem(),
            trial.n_channels()
        )));
    }
    let factor = decimation(trial.sampling_rate, cfg.de_sampling_rate)?;
    let seg = cfg.de_segment_len();
    let n_down = trial.n_samples().div_ceil(factor);
    if seg < 2 || n_down < seg {
        return Err(Error::InsufficientSamples {
            needed: seg * factor,
            got: trial.n_samples(),
        });
    }
    let n_seg = n_down / seg;
    let nb = cfg.de_bands.n_bands();
    let (lo, hi) = cfg.bandpass;

    let per_channel: Vec<(Vec<f64>, usize)> = (0..DE_CHANNELS)
        .into_par_iter()
        .map(|c| {
            let raw = trial.channel(c).to_vec();
            let broad = bandpass(&raw, trial.sampling_rate, lo, hi)?;
            let down = downsample(&broad, factor)?;
            let splitter = BandSplitter::new(&down, cfg.de_sampling_rate)?;
            // (segment, band) row-major
            let mut out = vec![0.0; n_seg * nb];
            let mut floored = 0;
            for (b, (f1, f2)) in cfg.de_bands.bands().enumerate() {
                let filtered = splitter.band(f1, f2)?;
                for s in 0..n_seg {
                    let e = differential_entropy(&filtered[s * seg..(s + 1) * seg])?;
                    floored += usize::from(e.floored);
                    out[s * nb + b] = e.value;
                }
            }
            Ok((out, floored))
        })
        .collect::<Result<_>>()?;

    let mut data = Array2::zeros((n_seg, DE_CHANNELS * nb));
    let mut floored = 0;
    for (c, (vals, f)) in per_channel.iter().enumerate() {
        floored += f;
        for s in 0..n_seg {
            for b in 0..nb {
                data[[s, c * nb + b]] = vals[s * nb + b];
            }
        }
    }
    if floored > 0 {
        log::warn!(
            "trial {}: {floored} DE cells had near-zero variance and were floored",
            trial.key.stem()
        );
    }
    Ok(FeatureMatrix::new(FeatureKind::De, data)?.with_row_seconds(cfg.de_segment_seconds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::EmotionLabel;
    use crate::types::TrialKey;
    use rand::Rng;
    use rand_distr::StandardNormal;

    const HALF_LN_2PIE: f64 = 1.418_938_533_204_672_7;

    #[test]
    fn unit_variance_constant() {
        assert!((0.5 * (2.0 * PI * E).ln() - HALF_LN_2PIE).abs() < 1e-15);
        // +-1 alternating, n even: unbiased variance n/(n-1).
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let want = 0.5 * (2.0 * PI * E * n as f64 / (n - 1) as f64).ln();
        assert!((differential_entropy(&x).unwrap().value - want).abs() < 1e-12);
    }

    #[test]
    fn inverted_formula_hits_one() {
        // sigma^2 = e^2 / (2 pi e) gives DE = 1.
        let sigma = (E * E / (2.0 * PI * E)).sqrt();
        let mut rng = crate::rng::seeded_rng(21);
        let trials = 200;
        let n = 800;
        let mean: f64 = (0..trials)
            .map(|_| {
                let x: Vec<f64> = (0..n)
                    .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                differential_entropy(&x).unwrap().value
            })
            .sum::<f64>()
            / trials as f64;
        // sd of ln(s^2)/2 is about 1/sqrt(2(n-1)) = 0.025; mean of 200 -> 0.0018.
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn scale_and_shift_laws() {
        let mut rng = crate::rng::seeded_rng(22);
        let x: Vec<f64> = (0..800).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let base = differential_entropy(&x).unwrap().value;
        let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let d = differential_entropy(&doubled).unwrap().value - base;
        assert!((d - 2f64.ln()).abs() < 1e-12);
        for a in [-3.0, 0.1, 17.5] {
            let scaled: Vec<f64> = x.iter().map(|v| a * v).collect();
            let d = differential_entropy(&scaled).unwrap().value - base;
            assert!((d - f64::ln(f64::abs(a))).abs() < 1e-12);
        }
        for c in [1.0, -4.5, 1e3] {
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let d = differential_entropy(&shifted).unwrap().value - base;
            assert!(d.abs() < 1e-9, "shift {c}: {d}");
        }
    }

    #[test]
    fn constant_segment_floored() {
        let e = differential_entropy(&[3.0; 50]).unwrap();
        assert!(e.floored);
        assert!((e.value - 0.5 * (2.0 * PI * E * VARIANCE_FLOOR).ln()).abs() < 1e-12);
        assert!(differential_entropy(&[1.0]).is_err());
    }

    fn trial(samples: Array2<f64>) -> RawTrial {
        RawTrial::new(
            TrialKey::new(1, 1, 2).unwrap(),
            EmotionLabel::Happy,
            1000.0,
            samples,
        )
        .unwrap()
    }

    #[test]
    fn one_segment_shape() {
        let mut rng = crate::rng::seeded_rng(23);
        let s = Array2::from_shape_fn((66, 4000), |_| rng.gen_range(-1.0..1.0));
        let m = extract_de(&trial(s), &PipelineConfig::default()).unwrap();
        assert_eq!(m.shape(), (1, 310));
    }

    #[test]
    fn too_short_for_a_segment() {
        let s = Array2::from_elem((66, 3000), 0.5);
        assert!(matches!(
            extract_de(&trial(s), &PipelineConfig::default()),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn band_limited_noise_dominates_its_band() {
        let mut rng = crate::rng::seeded_rng(24);
        let n = 8000;
        let mut s = Array2::zeros((62, n));
        for c in 0..62 {
            let white: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let alpha = bandpass(&white, 1000.0, 8.0, 13.9).unwrap();
            for (i, v) in alpha.into_iter().enumerate() {
                s[[c, i]] = v;
            }
        }
        let m = extract_de(&trial(s), &PipelineConfig::default()).unwrap();
        assert_eq!(m.shape(), (2, 310));
        let alpha = 2;
        for r in 0..m.nrows() {
            for c in 0..62 {
                for b in 0..5 {
                    if b != alpha {
                        assert!(m.data()[[r, c * 5 + alpha]] > m.data()[[r, c * 5 + b]]);
                    }
                }
            }
        }
    }

    #[test]
    fn non_integer_decimation_rejected() {
        assert!(decimation(1000.0, 300.0).is_err());
        assert_eq!(decimation(1000.0, 200.0).unwrap(), 5);
        assert_eq!(decimation(200.0, 200.0).unwrap(), 1);
    }
}
