//! Per-trial feature extraction and in-memory corpus assembly.

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::dsp::{extract_de, extract_power_spectrum, window_count};
use crate::error::Result;
use crate::fusion::{align_and_fuse, Corpus, CorpusBuilder};
use crate::synth::{generate_planned, plan_corpus, SynthSpec};
use crate::types::{FeatureMatrix, RawTrial};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFeatures {
    pub ps: FeatureMatrix,
    pub de: FeatureMatrix,
    pub fused: FeatureMatrix,
}

/// Power spectrum, DE and the fused `[PS | DE | EYE]` matrix of one trial.
pub fn extract_trial(raw: &RawTrial, eye: &FeatureMatrix, cfg: &PipelineConfig) -> Result<TrialFeatures> {
    let ps = extract_power_spectrum(raw, cfg)?;
    let de = extract_de(raw, cfg)?;
    let fused = align_and_fuse(&ps, &de, eye)?;
    Ok(TrialFeatures { ps, de, fused })
}

/// Generates, extracts and stacks every trial of `spec` without touching disk.
///
/// Trials are processed in parallel batches of one per worker and appended in
/// plan order, so the result does not depend on the thread count.
pub fn synth_corpus(spec: &SynthSpec, cfg: &PipelineConfig) -> Result<Corpus> {
    cfg.validate()?;
    let plan = plan_corpus(spec)?;
    let rows_per_trial = window_count(spec.n_samples(), cfg.window_len, cfg.hop)?;
    let mut builder = CorpusBuilder::with_capacity(plan.len() * rows_per_trial, cfg.fused_cols());
    let batch = rayon::current_num_threads().max(1);
    for chunk in plan.chunks(batch) {
        let fused: Vec<FeatureMatrix> = chunk
            .par_iter()
            .map(|&(key, label)| {
                let (raw, eye) = generate_planned(spec, key, label)?;
                Ok(extract_trial(&raw, &eye, cfg)?.fused)
            })
            .collect::<Result<_>>()?;
        for (m, &(key, label)) in fused.iter().zip(chunk) {
            builder.push(m.data(), label)?;
            log::debug!("fused trial {}: {:?}", key.stem(), m.shape());
        }
    }
    builder.finish()
}
