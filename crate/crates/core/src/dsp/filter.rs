use super::fft::{Complex64, Dft};
use crate::error::{Error, Result};

/// Brick-wall band-pass: zero every DFT bin whose frequency magnitude lies
/// outside `[low, high]`, then invert and keep the real part.
pub fn bandpass(signal: &[f64], fs: f64, low: f64, high: f64) -> Result<Vec<f64>> {
    let splitter = BandSplitter::new(signal, fs)?;
    splitter.band(low, high)
}

/// Keeps every `factor`-th sample starting at index 0.
pub fn downsample(signal: &[f64], factor: usize) -> Result<Vec<f64>> {
    if factor == 0 {
        return Err(Error::InvalidConfig("downsample factor must be >= 1".into()));
    }
    Ok(signal.iter().step_by(factor).copied().collect())
}

/// Spectrum of one signal, transformed once and masked per band.
pub struct BandSplitter {
    dft: Dft,
    spectrum: Vec<Complex64>,
    fs: f64,
}

impl BandSplitter {
    pub fn new(signal: &[f64], fs: f64) -> Result<Self> {
        if signal.is_empty() {
            return Err(Error::Empty("band-pass of an empty signal".into()));
        }
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::InvalidConfig(format!("sampling rate {fs}")));
        }
        let dft = Dft::new(signal.len())?;
        let spectrum = dft.forward_real(signal);
        Ok(BandSplitter { dft, spectrum, fs })
    }

    pub fn band(&self, low: f64, high: f64) -> Result<Vec<f64>> {
        let nyquist = self.fs / 2.0;
        if !(low > 0.0 && low < high && high < nyquist) {
            return Err(Error::InvalidBand(format!(
                "band-pass needs 0 < low < high < {nyquist} Hz, got [{low}, {high}]"
            )));
        }
        let n = self.spectrum.len();
        let bin_hz = self.fs / n as f64;
        let mut buf = self.spectrum.clone();
        for (k, z) in buf.iter_mut().enumerate() {
            let f = k.min(n - k) as f64 * bin_hz;
            if f < low || f > high {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        self.dft.inverse(&mut buf);
        Ok(buf.into_iter().map(|z| z.re).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / fs).sin()).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn stopband_attenuates() {
        let x = sine(0.5, 200.0, 400);
        let y = bandpass(&x, 200.0, 1.0, 75.0).unwrap();
        assert_eq!(y.len(), x.len());
        assert!(rms(&y) < 0.05 * rms(&x));
    }

    #[test]
    fn passband_is_identity() {
        let x = sine(10.0, 200.0, 200);
        let y = bandpass(&x, 200.0, 1.0, 75.0).unwrap();
        let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "max abs error {err}");
    }

    #[test]
    fn zero_in_zero_out() {
        let y = bandpass(&[0.0; 64], 200.0, 1.0, 75.0).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_bands() {
        let x = [1.0; 16];
        assert!(bandpass(&x, 200.0, 0.0, 10.0).is_err());
        assert!(bandpass(&x, 200.0, 10.0, 5.0).is_err());
        assert!(bandpass(&x, 200.0, 1.0, 100.0).is_err());
    }

    #[test]
    fn splitter_matches_independent_bandpass() {
        let x: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let s = BandSplitter::new(&x, 200.0).unwrap();
        for (lo, hi) in [(1.0, 4.0), (8.0, 14.0), (31.0, 51.0)] {
            let a = s.band(lo, hi).unwrap();
            let b = bandpass(&x, 200.0, lo, hi).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn downsample_examples() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(downsample(&x, 5).unwrap(), vec![0.0, 5.0]);
        assert_eq!(downsample(&x, 1).unwrap(), x);
        assert_eq!(downsample(&vec![0.0; 72000], 5).unwrap().len(), 14400);
        assert_eq!(downsample(&x, 3).unwrap().len(), 4);
        assert!(downsample(&x, 0).is_err());
    }
}
