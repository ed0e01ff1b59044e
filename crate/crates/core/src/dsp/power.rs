//! Band power from DFT magnitudes.
//!
//! The power of band `[f1, f2)` is the sum of `|X_k|` over bins whose centre
//! frequency `k * fs / W` falls in the band (the PyEEG `bin_power`
//! convention: magnitudes, not squared magnitudes). The DC bin is therefore
//! excluded whenever the lowest edge is above 0 Hz.

use ndarray::Array2;
use rayon::prelude::*;

use super::fft::{Complex64, Dft};
use super::window::{window_count, Window};
use crate::config::{BandSpec, PipelineConfig};
use crate::error::{Error, Result};
use crate::types::{FeatureKind, FeatureMatrix, RawTrial, FFT_CHANNELS};

const RELATIVE_FLOOR: f64 = 1e-12;

/// One-sided magnitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// `|X_k|` for `k = 0..=W/2`.
    pub magnitudes: Vec<f64>,
    pub bin_hz: f64,
}

impl Spectrum {
    pub fn of(samples: &[f64], fs: f64) -> Result<Self> {
        let dft = Dft::new(samples.len())?;
        let x = dft.forward_real(samples);
        Ok(Spectrum {
            magnitudes: x[..=samples.len() / 2].iter().map(|z| z.norm()).collect(),
            bin_hz: fs / samples.len() as f64,
        })
    }

    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.bin_hz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandPower {
    pub absolute: Vec<f64>,
    /// `absolute / sum(absolute)`; uniform when the total is zero.
    pub relative: Vec<f64>,
    /// Set when every band was empty and `relative` fell back to uniform.
    pub degenerate: bool,
}

pub fn bin_power(window: &Window<'_>, bands: &BandSpec, fs: f64) -> Result<BandPower> {
    let plan = BandPowerPlan::new(window.len(), bands, fs)?;
    let mut absolute = vec![0.0; bands.n_bands()];
    let spectrum = plan.dft.forward_real(window.samples);
    plan.accumulate(&spectrum, &mut absolute);
    let total: f64 = absolute.iter().sum();
    // In-band mass at roundoff level relative to the whole spectrum counts as empty.
    let whole: f64 = spectrum[..=window.len() / 2].iter().map(|z| z.norm()).sum();
    let nb = absolute.len();
    let (relative, degenerate) = if total > RELATIVE_FLOOR * whole && total > 0.0 {
        (absolute.iter().map(|a| a / total).collect(), false)
    } else {
        (vec![1.0 / nb as f64; nb], true)
    };
    Ok(BandPower {
        absolute,
        relative,
        degenerate,
    })
}

/// Precomputed bin-to-band map and DFT plan for a fixed window length.
#[derive(Debug)]
pub struct BandPowerPlan {
    dft: Dft,
    /// Contiguous `(band, first_bin, end_bin)` runs.
    runs: Vec<(usize, usize, usize)>,
    n_bands: usize,
}

impl BandPowerPlan {
    pub fn new(window_len: usize, bands: &BandSpec, fs: f64) -> Result<Self> {
        if window_len < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: window_len,
            });
        }
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::InvalidConfig(format!("sampling rate {fs}")));
        }
        let nyquist = fs / 2.0;
        // Upper edges may sit exactly on Nyquist: bands are half-open.
        if bands.upper() > nyquist {
            return Err(Error::InvalidBand(format!(
                "band edge {} Hz exceeds Nyquist {nyquist} Hz",
                bands.upper()
            )));
        }
        let bin_hz = fs / window_len as f64;
        let mut runs: Vec<(usize, usize, usize)> = Vec::new();
        for k in 0..=window_len / 2 {
            if let Some(b) = bands.locate(k as f64 * bin_hz) {
                match runs.last_mut() {
                    Some(run) if run.0 == b && run.2 == k => run.2 = k + 1,
                    _ => runs.push((b, k, k + 1)),
                }
            }
        }
        Ok(BandPowerPlan {
            dft: Dft::new(window_len)?,
            runs,
            n_bands: bands.n_bands(),
        })
    }

    pub fn window_len(&self) -> usize {
        self.dft.len()
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    /// Adds per-band magnitude sums of one transformed window into `out`.
    fn accumulate(&self, spectrum: &[Complex64], out: &mut [f64]) {
        for &(b, lo, hi) in &self.runs {
            out[b] += spectrum[lo..hi].iter().map(|z| z.norm()).sum::<f64>();
        }
    }

    /// Absolute band powers of every window of `signal`, row-major
    /// `(n_windows, n_bands)`.
    pub fn sliding(&self, signal: &[f64], hop: usize) -> Result<Vec<f64>> {
        let w = self.window_len();
        let n_win = window_count(signal.len(), w, hop)?;
        let mut buf = Vec::with_capacity(n_win * w);
        for i in 0..n_win {
            let start = i * hop;
            buf.extend(signal[start..start + w].iter().map(|&x| Complex64::new(x, 0.0)));
        }
        self.dft.forward(&mut buf);
        let mut out = vec![0.0; n_win * self.n_bands];
        for (spec, row) in buf.chunks_exact(w).zip(out.chunks_exact_mut(self.n_bands)) {
            self.accumulate(spec, row);
        }
        Ok(out)
    }
}

/// Sliding-window band powers of all 66 channels.
///
/// Columns are channel-major: channel 0 bands 0..n, channel 1 bands 0..n, ...
pub fn extract_power_spectrum(trial: &RawTrial, cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    if trial.n_channels() != FFT_CHANNELS {
        return Err(Error::Shape(format!(
            "power spectrum expects {FFT_CHANNELS} channels, trial {} has {}",
            trial.key.stem(),
            trial.n_channels()
        )));
    }
    let plan = BandPowerPlan::new(cfg.window_len, &cfg.band_edges, trial.sampling_rate)?;
    let n_win = window_count(trial.n_samples(), cfg.window_len, cfg.hop)?;
    let nb = plan.n_bands();
    let per_channel: Vec<Vec<f64>> = (0..trial.n_channels())
        .into_par_iter()
        .map(|c| {
            let ch = trial.channel(c);
            match ch.as_slice() {
                Some(s) => plan.sliding(s, cfg.hop),
                None => plan.sliding(&ch.to_vec(), cfg.hop),
            }
        })
        .collect::<Result<_>>()?;
    let mut data = Array2::zeros((n_win, trial.n_channels() * nb));
    for (c, powers) in per_channel.iter().enumerate() {
        for (r, row) in powers.chunks_exact(nb).enumerate() {
            for (b, &p) in row.iter().enumerate() {
                data[[r, c * nb + b]] = p;
            }
        }
    }
    Ok(FeatureMatrix::new(FeatureKind::PowerSpectrum, data)?
        .with_row_seconds(cfg.window_len as f64 / trial.sampling_rate))
}
