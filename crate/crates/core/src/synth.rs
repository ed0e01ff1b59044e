//! Synthetic SEED-V-shaped corpus: raw EEG plus eye feature vectors.
//!
//! Each channel is pink background noise plus one sinusoid per analysis band.
//! Tone amplitudes come from the emotion's band profile, scaled by a per-trial
//! jitter and a slow per-trial drift, so windows of one trial resemble each
//! other more than windows of another trial with the same label.

use std::f64::consts::TAU;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::BandSpec;
use crate::error::{Error, Result};
use crate::io::manifest::{Manifest, ManifestEntry};
use crate::io::npy::write_npy;
use crate::label::{EmotionLabel, N_CLASSES};
use crate::rng::{derive_path, seeded_rng, Rng};
use crate::types::{FeatureKind, FeatureMatrix, RawTrial, TrialKey, EYE_FEATURES, FFT_CHANNELS};

const SCHEDULE_TAG: u64 = 0x5c4e_d01e;
const TRIAL_TAG: u64 = 0x0074_17a1;

/// Gain that brings the pink filter output to roughly unit RMS.
const PINK_GAIN: f64 = 0.32;
const PINK_WARMUP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_participants: u32,
    pub n_sessions: u8,
    pub trials_per_session: u8,
    pub channels: usize,
    pub sampling_rate: f64,
    pub trial_seconds: f64,
    /// Bands the class tones are placed in.
    pub bands: BandSpec,
    /// Tone amplitude per emotion (rows) and band (columns).
    pub class_profiles: Vec<Vec<f64>>,
    /// Mean eye feature vector per emotion.
    pub eye_class_means: Vec<Vec<f64>>,
    pub eye_segment_seconds: f64,
    /// Scales the background noise and the eye feature noise.
    pub noise_level: f64,
    pub eye_noise: f64,
    /// Slow sinusoidal amplitude modulation of each band within a trial.
    pub drift: bool,
    pub drift_depth: f64,
    /// Log-normal spread of per-trial, per-channel tone gains.
    pub trial_jitter: f64,
    /// Tones sit on multiples of this frequency when the band contains one.
    pub tone_grid_hz: f64,
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_participants: 16,
            n_sessions: 3,
            trials_per_session: 15,
            channels: FFT_CHANNELS,
            sampling_rate: 1000.0,
            trial_seconds: 72.0,
            bands: BandSpec::power_default(),
            class_profiles: default_profiles(),
            eye_class_means: default_eye_means(),
            eye_segment_seconds: 4.0,
            noise_level: 1.0,
            eye_noise: 1.0,
            drift: true,
            drift_depth: 0.3,
            trial_jitter: 0.25,
            tone_grid_hz: 5.0,
            rng_seed: 0,
        }
    }
}

fn default_profiles() -> Vec<Vec<f64>> {
    vec![
        vec![0.6, 0.5, 0.3, 0.4, 0.7, 0.5],
        vec![0.4, 0.7, 0.3, 0.5, 0.5, 0.6],
        vec![0.7, 0.4, 0.6, 0.3, 0.3, 0.3],
        vec![0.5, 0.5, 0.7, 0.5, 0.4, 0.3],
        vec![0.4, 0.4, 0.5, 0.6, 0.6, 0.7],
    ]
}

fn default_eye_means() -> Vec<Vec<f64>> {
    (0..N_CLASSES)
        .map(|c| {
            (0..EYE_FEATURES)
                .map(|j| 0.5 * (1.3 * (j + 1) as f64 * (c + 1) as f64).sin())
                .collect()
        })
        .collect()
}

impl SynthSpec {
    /// Four participants; the default corpus for learnability checks.
    pub fn small() -> Self {
        SynthSpec {
            n_participants: 4,
            ..SynthSpec::default()
        }
    }

    pub fn n_samples(&self) -> usize {
        (self.trial_seconds * self.sampling_rate).round() as usize
    }

    pub fn eye_rows(&self) -> usize {
        (self.trial_seconds / self.eye_segment_seconds).floor() as usize
    }

    pub fn n_trials(&self) -> usize {
        self.n_participants as usize * self.n_sessions as usize * self.trials_per_session as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_participants == 0 || self.n_sessions == 0 || self.n_sessions > 3 {
            return bad(format!(
                "need >= 1 participant and 1..=3 sessions, got {} and {}",
                self.n_participants, self.n_sessions
            ));
        }
        if self.trials_per_session == 0
            || self.trials_per_session > 15
            || !(self.trials_per_session as usize).is_multiple_of(N_CLASSES)
        {
            return bad(format!(
                "trials per session must be a multiple of {N_CLASSES} up to 15, got {}",
                self.trials_per_session
            ));
        }
        if self.channels == 0 {
            return bad("channel count must be >= 1".into());
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate.is_finite()) {
            return bad(format!("sampling rate {} must be > 0", self.sampling_rate));
        }
        if self.bands.upper() > self.sampling_rate / 2.0 {
            return bad(format!(
                "band edge {} Hz above Nyquist at {} Hz",
                self.bands.upper(),
                self.sampling_rate
            ));
        }
        if !(self.trial_seconds > 0.0) || self.n_samples() == 0 {
            return bad(format!("trial length {} s gives no samples", self.trial_seconds));
        }
        if !(self.eye_segment_seconds > 0.0) || self.eye_rows() == 0 {
            return bad(format!(
                "eye segment {} s does not fit a {} s trial",
                self.eye_segment_seconds, self.trial_seconds
            ));
        }
        let nb = self.bands.n_bands();
        if self.class_profiles.len() != N_CLASSES || self.class_profiles.iter().any(|p| p.len() != nb) {
            return bad(format!("class_profiles must be {N_CLASSES} x {nb}"));
        }
        if self.class_profiles.iter().flatten().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return bad("class profile amplitudes must be finite and >= 0".into());
        }
        if self.eye_class_means.len() != N_CLASSES
            || self.eye_class_means.iter().any(|m| m.len() != EYE_FEATURES)
            || self.eye_class_means.iter().flatten().any(|v| !v.is_finite())
        {
            return bad(format!("eye_class_means must be {N_CLASSES} x {EYE_FEATURES} finite values"));
        }
        for (name, v) in [
            ("noise_level", self.noise_level),
            ("eye_noise", self.eye_noise),
            ("drift_depth", self.drift_depth),
            ("trial_jitter", self.trial_jitter),
            ("tone_grid_hz", self.tone_grid_hz),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.drift_depth > 1.0 {
            return bad(format!("drift_depth {} would make amplitudes negative", self.drift_depth));
        }
        Ok(())
    }
}

/// Session label order: each emotion `trials / 5` times, never twice in a row.
pub fn label_schedule(trials: usize, rng: &mut Rng) -> Vec<EmotionLabel> {
    let mut out: Vec<EmotionLabel> = Vec::with_capacity(trials);
    for _ in 0..trials / N_CLASSES {
        let mut block = EmotionLabel::ALL;
        block.shuffle(rng);
        if out.last() == Some(&block[0]) {
            let j = rng.gen_range(1..N_CLASSES);
            block.swap(0, j);
        }
        out.extend(block);
    }
    out
}

/// Paul Kellet's refined pink filter driven by Gaussian white noise.
struct Pink {
    b: [f64; 7],
}

impl Pink {
    fn new(rng: &mut Rng) -> Self {
        let mut p = Pink { b: [0.0; 7] };
        for _ in 0..PINK_WARMUP {
            p.next(rng);
        }
        p
    }

    fn next(&mut self, rng: &mut Rng) -> f64 {
        let w: f64 = rng.sample(StandardNormal);
        let b = &mut self.b;
        b[0] = 0.99886 * b[0] + w * 0.0555179;
        b[1] = 0.99332 * b[1] + w * 0.0750759;
        b[2] = 0.96900 * b[2] + w * 0.1538520;
        b[3] = 0.86650 * b[3] + w * 0.3104856;
        b[4] = 0.55000 * b[4] + w * 0.5329522;
        b[5] = -0.7616 * b[5] - w * 0.0168980;
        let out = b.iter().sum::<f64>() + w * 0.5362;
        b[6] = w * 0.115926;
        out * PINK_GAIN
    }
}

fn tone_frequency(lo: f64, hi: f64, grid: f64, nyquist: f64, rng: &mut Rng) -> f64 {
    let hi = hi.min(nyquist);
    if grid > 0.0 {
        let first = (lo / grid).ceil() as i64;
        let candidates: Vec<f64> = (first..)
            .map(|k| k as f64 * grid)
            .take_while(|&f| f < hi)
            .filter(|&f| f > 0.0)
            .collect();
        if let Some(&f) = candidates.choose(rng) {
            return f;
        }
    }
    rng.gen_range(lo..hi)
}

/// One trial of raw EEG `(channels, n_samples)` and its eye features
/// `(eye_rows, 33)`. Deterministic given the RNG state.
pub fn generate_trial(
    key: TrialKey,
    label: EmotionLabel,
    spec: &SynthSpec,
    rng: &mut Rng,
) -> Result<(RawTrial, FeatureMatrix)> {
    spec.validate()?;
    let n = spec.n_samples();
    let fs = spec.sampling_rate;
    let profile = &spec.class_profiles[label.index()];
    let bands: Vec<(f64, f64)> = spec.bands.bands().collect();

    // Per-band envelopes shared by all channels of the trial.
    let envelopes: Vec<Vec<f64>> = bands
        .iter()
        .map(|_| {
            let period = rng.gen_range(20.0..60.0);
            let phase = rng.gen_range(0.0..TAU);
            (0..n)
                .map(|i| {
                    if spec.drift {
                        1.0 + spec.drift_depth * (TAU * i as f64 / fs / period + phase).sin()
                    } else {
                        1.0
                    }
                })
                .collect()
        })
        .collect();

    let mut samples = Array2::zeros((spec.channels, n));
    for mut row in samples.rows_mut() {
        let out = row.as_slice_mut().expect("row-major samples");
        let mut pink = Pink::new(rng);
        for v in out.iter_mut() {
            *v = spec.noise_level * pink.next(rng);
        }
        for (b, &(lo, hi)) in bands.iter().enumerate() {
            let gain: f64 = (spec.trial_jitter * rng.sample::<f64, _>(StandardNormal)).exp();
            let freq = tone_frequency(lo, hi, spec.tone_grid_hz, fs / 2.0, rng);
            let phase = rng.gen_range(0.0..TAU);
            let amp = profile[b] * gain;
            if amp == 0.0 {
                continue;
            }
            let step = Complex64::from_polar(1.0, TAU * freq / fs);
            let mut z = Complex64::from_polar(amp, phase);
            for (v, &e) in out.iter_mut().zip(&envelopes[b]) {
                *v += e * z.im;
                z *= step;
            }
        }
    }
    let raw = RawTrial::new(key, label, fs, samples)?;

    let means = &spec.eye_class_means[label.index()];
    let offset: Vec<f64> = (0..EYE_FEATURES)
        .map(|_| spec.trial_jitter * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let sigma = spec.eye_noise * spec.noise_level;
    let eye = Array2::from_shape_fn((spec.eye_rows(), EYE_FEATURES), |(_, j)| {
        means[j] + offset[j] + sigma * rng.sample::<f64, _>(StandardNormal)
    });
    let eye = FeatureMatrix::new(FeatureKind::Eye, eye)?.with_row_seconds(spec.eye_segment_seconds);
    Ok((raw, eye))
}

/// Every trial of the spec with its label, in participant/session/trial order.
pub fn plan_corpus(spec: &SynthSpec) -> Result<Vec<(TrialKey, EmotionLabel)>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.n_trials());
    for p in 1..=spec.n_participants {
        for s in 1..=spec.n_sessions {
            let mut rng = seeded_rng(derive_path(spec.rng_seed, &[SCHEDULE_TAG, p as u64, s as u64]));
            let labels = label_schedule(spec.trials_per_session as usize, &mut rng);
            for (t, label) in labels.into_iter().enumerate() {
                out.push((TrialKey::new(p, s, t as u8 + 1)?, label));
            }
        }
    }
    Ok(out)
}

/// RNG for one trial, independent of generation order.
pub fn trial_rng(spec: &SynthSpec, key: TrialKey) -> Rng {
    seeded_rng(derive_path(
        spec.rng_seed,
        &[TRIAL_TAG, key.participant as u64, key.session as u64, key.trial as u64],
    ))
}

/// Generates one planned trial with its own derived RNG.
pub fn generate_planned(spec: &SynthSpec, key: TrialKey, label: EmotionLabel) -> Result<(RawTrial, FeatureMatrix)> {
    generate_trial(key, label, spec, &mut trial_rng(spec, key))
}

pub fn raw_file_name(key: &TrialKey) -> String {
    format!("{}_EEG.npy", key.stem())
}

pub fn eye_file_name(key: &TrialKey) -> String {
    format!("{}_EYE.npy", key.stem())
}

/// Writes every trial plus `manifest.json` into `out_dir`.
pub fn generate_corpus(spec: &SynthSpec, out_dir: &Path) -> Result<Manifest> {
    let plan = plan_corpus(spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let entries: Vec<ManifestEntry> = plan
        .par_iter()
        .map(|&(key, label)| {
            let (raw, eye) = generate_planned(spec, key, label)?;
            let raw_path = raw_file_name(&key);
            let eye_path = eye_file_name(&key);
            write_npy(&out_dir.join(&raw_path), raw.samples())?;
            write_npy(&out_dir.join(&eye_path), eye.data())?;
            log::debug!("wrote {}", key.stem());
            Ok(ManifestEntry {
                participant: key.participant,
                session: key.session,
                trial: key.trial,
                label,
                raw_path,
                eye_path,
            })
        })
        .collect::<Result<_>>()?;
    let mut manifest = Manifest::new(entries, Some(spec.clone()))?;
    manifest.save(&out_dir.join(crate::io::manifest::MANIFEST_FILE))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PipelineConfig;
    use crate::dsp::extract_power_spectrum;

    fn tiny(seconds: f64) -> SynthSpec {
        SynthSpec {
            n_participants: 1,
            n_sessions: 1,
            trial_seconds: seconds,
            eye_segment_seconds: seconds.min(4.0),
            ..SynthSpec::default()
        }
    }

    #[test]
    fn schedule_balanced_without_repeats() {
        for seed in 0..200 {
            let mut rng = seeded_rng(seed);
            let s = label_schedule(15, &mut rng);
            assert_eq!(s.len(), 15);
            assert!(s.windows(2).all(|w| w[0] != w[1]), "{s:?}");
            for l in EmotionLabel::ALL {
                assert_eq!(s.iter().filter(|&&x| x == l).count(), 3);
            }
        }
    }

    #[test]
    fn pink_noise_is_unit_scale_and_low_heavy() {
        let mut rng = seeded_rng(3);
        let mut p = Pink::new(&mut rng);
        let x: Vec<f64> = (0..1 << 16).map(|_| p.next(&mut rng)).collect();
        let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        assert!((0.8..1.25).contains(&rms), "rms {rms}");
        let spec = crate::dsp::fft(&x).unwrap();
        let n = x.len();
        let band = |lo: usize, hi: usize| spec[lo..hi].iter().map(|z| z.norm_sqr()).sum::<f64>() / (hi - lo) as f64;
        // Per-bin power falls with frequency.
        assert!(band(n / 64, n / 32) > 4.0 * band(n / 8, n / 4));
    }

    #[test]
    fn default_shapes() {
        let spec = SynthSpec::default();
        let key = TrialKey::new(1, 1, 1).unwrap();
        let (raw, eye) = generate_planned(&spec, key, EmotionLabel::Sad).unwrap();
        assert_eq!((raw.n_channels(), raw.n_samples()), (66, 72_000));
        assert_eq!(eye.shape(), (18, 33));
    }

    #[test]
    fn deterministic() {
        let spec = tiny(2.0);
        let key = TrialKey::new(1, 1, 2).unwrap();
        let a = generate_planned(&spec, key, EmotionLabel::Fear).unwrap();
        let b = generate_planned(&spec, key, EmotionLabel::Fear).unwrap();
        assert_eq!(a, b);
        let other = generate_planned(&spec, TrialKey::new(1, 1, 3).unwrap(), EmotionLabel::Fear).unwrap();
        assert_ne!(a.0.samples(), other.0.samples());
    }

    #[test]
    fn one_hot_profile_peaks_in_its_band() {
        let cfg = PipelineConfig::default();
        // Band 0 (0.5-4 Hz) has no bin at 5 Hz resolution, so start at 1.
        for b in 1..6 {
            let mut profiles = vec![vec![0.0; 6]; 5];
            profiles[1][b] = 1.0;
            let spec = SynthSpec {
                noise_level: 0.0,
                drift: false,
                trial_jitter: 0.0,
                class_profiles: profiles,
                ..tiny(1.0)
            };
            let key = TrialKey::new(1, 1, 1).unwrap();
            let (raw, _) = generate_planned(&spec, key, EmotionLabel::Fear).unwrap();
            let ps = extract_power_spectrum(&raw, &cfg).unwrap();
            for r in 0..ps.nrows() {
                let row = ps.row(r);
                for c in 0..66 {
                    let block = row.slice(ndarray::s![c * 6..c * 6 + 6]);
                    let top = crate::label::argmax(&block.to_vec());
                    assert_eq!(top, b, "band {b} channel {c} row {r}: {block}");
                }
            }
        }
    }

    #[test]
    fn validation() {
        let mut s = SynthSpec { trials_per_session: 7, ..SynthSpec::default() };
        assert!(s.validate().is_err());
        s.trials_per_session = 15;
        s.class_profiles[0][0] = -1.0;
        assert!(s.validate().is_err());
        let s = SynthSpec { eye_segment_seconds: 100.0, ..SynthSpec::default() };
        assert!(s.validate().is_err());
        assert!(SynthSpec::default().validate().is_ok());
    }

    #[test]
    fn plan_covers_every_trial_once() {
        let spec = SynthSpec { n_participants: 2, n_sessions: 2, ..SynthSpec::default() };
        let plan = plan_corpus(&spec).unwrap();
        assert_eq!(plan.len(), 60);
        let mut keys: Vec<_> = plan.iter().map(|p| p.0).collect();
        keys.dedup();
        assert_eq!(keys.len(), 60);
    }
}
