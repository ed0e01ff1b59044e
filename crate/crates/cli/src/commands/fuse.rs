use std::path::Path;

use anyhow::{Context, Result};
use neurofuse::fusion::align_and_fuse;
use neurofuse::io::dataset::{DATA_FILE, LABELS_FILE};
use neurofuse::io::{read_npy, read_npy_shape, DatasetIndex, DatasetTrial, Manifest, NpyWriter};
use neurofuse::{FeatureKind, FeatureMatrix};

use super::create_dir;
use super::extract::{de_file_name, fft_file_name};

/// Aligns each trial's PS, DE and eye matrices and streams the fused rows
/// into `data.npy` / `labels.npy` in manifest order.
pub fn cmd_fuse(corpus: &Path, features: &Path, out: &Path) -> Result<()> {
    let m = Manifest::read(corpus).with_context(|| format!("reading manifest {}", corpus.display()))?;
    if m.entries.is_empty() {
        return Err(neurofuse::Error::Empty("manifest lists no trials".into()).into());
    }
    let mut rows = Vec::with_capacity(m.entries.len());
    for e in &m.entries {
        let shape = read_npy_shape(&features.join(fft_file_name(&e.key()?)))?;
        rows.push(shape[0]);
    }
    let total: usize = rows.iter().sum();

    create_dir(out)?;
    let mut data: Option<NpyWriter> = None;
    let mut labels = NpyWriter::create(&out.join(LABELS_FILE), &[total, neurofuse::N_CLASSES])?;
    let mut trials = Vec::with_capacity(m.entries.len());
    let mut cols = 0;
    for (e, &n) in m.entries.iter().zip(&rows) {
        let key = e.key()?;
        let ps = FeatureMatrix::new(FeatureKind::PowerSpectrum, read_npy(&features.join(fft_file_name(&key)))?)?;
        let de = FeatureMatrix::new(FeatureKind::De, read_npy(&features.join(de_file_name(&key)))?)?;
        let eye = FeatureMatrix::new(FeatureKind::Eye, read_npy(&m.eye_path(e))?)?;
        let fused = align_and_fuse(&ps, &de, &eye).with_context(|| format!("fusing trial {}", key.stem()))?;
        if data.is_none() {
            cols = fused.ncols();
            data = Some(NpyWriter::create(&out.join(DATA_FILE), &[total, cols])?);
        }
        data.as_mut().expect("created above").append(fused.data().iter().copied())?;
        let onehot = e.label.onehot();
        for _ in 0..n {
            labels.append(onehot.iter().copied())?;
        }
        trials.push(DatasetTrial {
            participant: key.participant,
            session: key.session,
            trial: key.trial,
            label: e.label,
            rows: n,
        });
    }
    data.expect("at least one trial").finish()?;
    labels.finish()?;
    DatasetIndex::new(cols, trials).save(out)?;
    println!("fused {} trials into {total} x {cols} rows at {}", m.entries.len(), out.display());
    Ok(())
}
