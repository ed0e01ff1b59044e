use std::path::Path;

use anyhow::{anyhow, Context, Result};
use neurofuse::io::{read_npy, write_npy, Manifest, ManifestEntry};
use neurofuse::pipeline::extract_trial;
use neurofuse::{FeatureKind, FeatureMatrix, PipelineConfig, RawTrial, TrialKey};

use super::create_dir;

/// Sampling rate assumed when the manifest carries no synthesis settings.
pub const DEFAULT_SAMPLING_RATE: f64 = 1000.0;

pub fn fft_file_name(key: &TrialKey) -> String {
    format!("{}_FFT.npy", key.stem())
}

pub fn de_file_name(key: &TrialKey) -> String {
    format!("{}_DE.npy", key.stem())
}

pub(crate) fn sampling_rate(m: &Manifest) -> f64 {
    m.synth.as_ref().map_or(DEFAULT_SAMPLING_RATE, |s| s.sampling_rate)
}

pub(crate) fn load_trial(m: &Manifest, e: &ManifestEntry) -> Result<(RawTrial, FeatureMatrix)> {
    let key = e.key()?;
    let raw = read_npy(&m.raw_path(e))?;
    let raw = RawTrial::new(key, e.label, sampling_rate(m), raw)?;
    let eye = FeatureMatrix::new(FeatureKind::Eye, read_npy(&m.eye_path(e))?)?;
    Ok((raw, eye))
}

fn extract_one(m: &Manifest, e: &ManifestEntry, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let (raw, eye) = load_trial(m, e)?;
    let f = extract_trial(&raw, &eye, cfg)?;
    write_npy(&out.join(fft_file_name(&raw.key)), f.ps.data())?;
    write_npy(&out.join(de_file_name(&raw.key)), f.de.data())?;
    Ok(())
}

/// Writes `<stem>_FFT.npy` and `<stem>_DE.npy` for every trial. A failing
/// trial is reported and skipped; the command still fails at the end.
pub fn cmd_extract(cfg: &PipelineConfig, corpus: &Path, out: &Path) -> Result<()> {
    let m = Manifest::read(corpus).with_context(|| format!("reading manifest {}", corpus.display()))?;
    create_dir(out)?;
    let mut failures = Vec::new();
    for e in &m.entries {
        let stem = e.key().map(|k| k.stem()).unwrap_or_default();
        match extract_one(&m, e, cfg, out) {
            Ok(()) => log::info!("extracted {stem}"),
            Err(err) => {
                eprintln!("trial {stem}: {err:#}");
                failures.push(err);
            }
        }
    }
    let done = m.entries.len() - failures.len();
    println!("extracted {done} of {} trials into {}", m.entries.len(), out.display());
    match failures.into_iter().next() {
        None => Ok(()),
        Some(first) => Err(first.context(anyhow!("{} trials failed", m.entries.len() - done))),
    }
}
