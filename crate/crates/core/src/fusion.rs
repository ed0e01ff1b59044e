//! Row alignment and stacking of the three feature streams.
//!
//! DE and eye features arrive once per 4 s segment while band powers arrive
//! once per sliding window. The sparse streams are upsampled by repeating
//! rows so every stream has one row per window, then concatenated as
//! `[power spectrum | DE | eye]`.

use ndarray::{concatenate, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, N_CLASSES};
use crate::types::{FeatureKind, FeatureMatrix};

/// Column order of the fused matrix.
pub const FUSED_ORDER: [FeatureKind; 3] =
    [FeatureKind::PowerSpectrum, FeatureKind::De, FeatureKind::Eye];

/// How many times each source row is repeated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepeatPlan {
    counts: Vec<usize>,
}

impl RepeatPlan {
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn src_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn dst_rows(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Near-uniform repeat counts; the first `dst mod src` rows get one extra copy.
pub fn compute_repeat_plan(src_rows: usize, dst_rows: usize) -> Result<RepeatPlan> {
    if src_rows == 0 {
        return Err(Error::Empty("repeat plan over zero source rows".into()));
    }
    if src_rows > dst_rows {
        return Err(Error::DownsampleNotSupported {
            src: src_rows,
            dst: dst_rows,
        });
    }
    let base = dst_rows / src_rows;
    let extra = dst_rows - base * src_rows;
    let counts = (0..src_rows)
        .map(|i| if i < extra { base + 1 } else { base })
        .collect();
    Ok(RepeatPlan { counts })
}

pub fn pad_rows(m: &FeatureMatrix, plan: &RepeatPlan) -> Result<FeatureMatrix> {
    if plan.src_rows() != m.nrows() {
        return Err(Error::Shape(format!(
            "repeat plan covers {} rows but the {} matrix has {}",
            plan.src_rows(),
            m.kind().name(),
            m.nrows()
        )));
    }
    let src = m.data();
    let mut out = Array2::zeros((plan.dst_rows(), m.ncols()));
    let mut r = 0;
    for (i, &n) in plan.counts().iter().enumerate() {
        for _ in 0..n {
            out.row_mut(r).assign(&src.row(i));
            r += 1;
        }
    }
    let mut padded = FeatureMatrix::new(m.kind(), out)?;
    padded.col_names = m.col_names.clone();
    Ok(padded)
}

fn expect_kind(m: &FeatureMatrix, kind: FeatureKind) -> Result<()> {
    if m.kind() != kind {
        return Err(Error::Shape(format!(
            "expected a {} matrix, got {}",
            kind.name(),
            m.kind().name()
        )));
    }
    Ok(())
}

/// Horizontal concatenation `[ps | de | eye]` of row-aligned matrices.
pub fn fuse(ps: &FeatureMatrix, eye: &FeatureMatrix, de: &FeatureMatrix) -> Result<FeatureMatrix> {
    expect_kind(ps, FeatureKind::PowerSpectrum)?;
    expect_kind(eye, FeatureKind::Eye)?;
    expect_kind(de, FeatureKind::De)?;
    let rows = ps.nrows();
    for (m, name) in [(de, "de"), (eye, "eye")] {
        if m.nrows() != rows {
            return Err(Error::Alignment {
                modality: name,
                expected: rows,
                got: m.nrows(),
            });
        }
    }
    let data = concatenate(Axis(1), &[ps.data(), de.data(), eye.data()])
        .map_err(|e| Error::Shape(e.to_string()))?;
    let mut fused = FeatureMatrix::new(FeatureKind::Fused, data)?;
    fused.row_seconds = ps.row_seconds;
    Ok(fused)
}

/// Pad DE and eye rows up to the window count of `ps` and fuse.
pub fn align_and_fuse(
    ps: &FeatureMatrix,
    de: &FeatureMatrix,
    eye: &FeatureMatrix,
) -> Result<FeatureMatrix> {
    let rows = ps.nrows();
    let de = pad_rows(de, &compute_repeat_plan(de.nrows(), rows)?)?;
    let eye = pad_rows(eye, &compute_repeat_plan(eye.nrows(), rows)?)?;
    fuse(ps, &eye, &de)
}

/// Stacked rows of many trials with one-hot labels and per-row trial ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub data: Array2<f64>,
    pub labels: Array2<f64>,
    /// Index into the trial sequence for every row.
    pub trial_of_row: Vec<u32>,
    pub trial_labels: Vec<EmotionLabel>,
}

impl Corpus {
    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_trials(&self) -> usize {
        self.trial_labels.len()
    }

    pub fn row_label(&self, r: usize) -> EmotionLabel {
        self.trial_labels[self.trial_of_row[r] as usize]
    }

    pub fn row_labels(&self) -> Vec<EmotionLabel> {
        (0..self.n_rows()).map(|r| self.row_label(r)).collect()
    }
}

/// Appends fused trials one at a time so the per-trial matrices can be
/// dropped as soon as they are copied.
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    cols: Option<usize>,
    values: Vec<f64>,
    trial_of_row: Vec<u32>,
    trial_labels: Vec<EmotionLabel>,
}

impl CorpusBuilder {
    pub fn with_capacity(rows: usize, cols: usize) -> Self {
        CorpusBuilder {
            cols: Some(cols),
            values: Vec::with_capacity(rows * cols),
            trial_of_row: Vec::with_capacity(rows),
            trial_labels: Vec::new(),
        }
    }

    pub fn push(&mut self, fused: ArrayView2<'_, f64>, label: EmotionLabel) -> Result<()> {
        let cols = *self.cols.get_or_insert(fused.ncols());
        if fused.ncols() != cols {
            return Err(Error::Shape(format!(
                "trial {} has {} columns, corpus has {cols}",
                self.trial_labels.len(),
                fused.ncols()
            )));
        }
        let t = u32::try_from(self.trial_labels.len())
            .map_err(|_| Error::Shape("too many trials".into()))?;
        self.values.extend(fused.iter().copied());
        self.trial_of_row
            .extend(std::iter::repeat_n(t, fused.nrows()));
        self.trial_labels.push(label);
        Ok(())
    }

    pub fn finish(self) -> Result<Corpus> {
        let cols = match self.cols {
            Some(c) if !self.trial_labels.is_empty() => c,
            _ => return Err(Error::Empty("corpus has no trials".into())),
        };
        let rows = self.trial_of_row.len();
        let data = Array2::from_shape_vec((rows, cols), self.values)
            .map_err(|e| Error::Shape(e.to_string()))?;
        let mut labels = Array2::zeros((rows, N_CLASSES));
        for (r, &t) in self.trial_of_row.iter().enumerate() {
            labels[[r, self.trial_labels[t as usize].index()]] = 1.0;
        }
        Ok(Corpus {
            data,
            labels,
            trial_of_row: self.trial_of_row,
            trial_labels: self.trial_labels,
        })
    }
}

/// Vertical stack of fused trials in order, labels repeated per window.
pub fn assemble_corpus(trials: &[(FeatureMatrix, EmotionLabel)]) -> Result<Corpus> {
    let rows = trials.iter().map(|(m, _)| m.nrows()).sum();
    let cols = trials.first().map_or(0, |(m, _)| m.ncols());
    let mut b = CorpusBuilder::with_capacity(rows, cols);
    for (m, label) in trials {
        expect_kind(m, FeatureKind::Fused)?;
        b.push(m.data(), *label)?;
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::s;
    use proptest::prelude::*;

    fn counting(kind: FeatureKind, rows: usize, cols: usize, offset: f64) -> FeatureMatrix {
        let data = Array2::from_shape_fn((rows, cols), |(r, c)| offset + (r * cols + c) as f64);
        FeatureMatrix::new(kind, data).unwrap()
    }

    #[test]
    fn full_trial_repeat_plan() {
        let p = compute_repeat_plan(18, 1437).unwrap();
        assert_eq!(p.dst_rows(), 1437);
        assert_eq!(p.counts().iter().filter(|&&c| c == 80).count(), 15);
        assert_eq!(p.counts().iter().filter(|&&c| c == 79).count(), 3);
        assert!(p.counts()[..15].iter().all(|&c| c == 80));
    }

    #[test]
    fn small_plans() {
        assert_eq!(compute_repeat_plan(7, 7).unwrap().counts(), &[1; 7]);
        assert_eq!(compute_repeat_plan(3, 10).unwrap().counts(), &[4, 3, 3]);
        assert!(matches!(
            compute_repeat_plan(5, 4),
            Err(Error::DownsampleNotSupported { src: 5, dst: 4 })
        ));
        assert!(compute_repeat_plan(0, 4).is_err());
    }

    #[test]
    fn pad_to_window_count() {
        let plan = compute_repeat_plan(18, 1437).unwrap();
        let eye = pad_rows(&counting(FeatureKind::Eye, 18, 33, 0.0), &plan).unwrap();
        assert_eq!(eye.shape(), (1437, 33));
        let de = pad_rows(&counting(FeatureKind::De, 18, 310, 0.0), &plan).unwrap();
        assert_eq!(de.shape(), (1437, 310));
        assert_eq!(de.row(79), de.row(0));
        assert_ne!(de.row(80), de.row(0));
    }

    #[test]
    fn identity_plan_is_identity() {
        let m = counting(FeatureKind::Eye, 5, 3, 0.5);
        let p = compute_repeat_plan(5, 5).unwrap();
        assert_eq!(pad_rows(&m, &p).unwrap(), m);
    }

    #[test]
    fn plan_mismatch() {
        let m = counting(FeatureKind::Eye, 4, 3, 0.0);
        assert!(pad_rows(&m, &compute_repeat_plan(5, 9).unwrap()).is_err());
    }

    #[test]
    fn fuse_blocks_round_trip() {
        let ps = counting(FeatureKind::PowerSpectrum, 1437, 396, 0.0);
        let eye = counting(FeatureKind::Eye, 1437, 33, 1e7);
        let de = counting(FeatureKind::De, 1437, 310, 2e7);
        let f = fuse(&ps, &eye, &de).unwrap();
        assert_eq!(f.shape(), (1437, 739));
        assert_eq!(f.data().slice(s![.., 0..396]), ps.data());
        assert_eq!(f.data().slice(s![.., 396..706]), de.data());
        assert_eq!(f.data().slice(s![.., 706..739]), eye.data());
    }

    #[test]
    fn fuse_single_row() {
        let f = fuse(
            &counting(FeatureKind::PowerSpectrum, 1, 396, 0.0),
            &counting(FeatureKind::Eye, 1, 33, 0.0),
            &counting(FeatureKind::De, 1, 310, 0.0),
        )
        .unwrap();
        assert_eq!(f.shape(), (1, 739));
    }

    #[test]
    fn fuse_names_misaligned_modality() {
        let err = fuse(
            &counting(FeatureKind::PowerSpectrum, 4, 396, 0.0),
            &counting(FeatureKind::Eye, 3, 33, 0.0),
            &counting(FeatureKind::De, 4, 310, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Alignment { modality: "eye", .. }));
        // swapped arguments are caught by kind
        assert!(fuse(
            &counting(FeatureKind::PowerSpectrum, 4, 396, 0.0),
            &counting(FeatureKind::De, 4, 310, 0.0),
            &counting(FeatureKind::Eye, 4, 33, 0.0),
        )
        .is_err());
    }

    #[test]
    fn align_paper_shapes() {
        let f = align_and_fuse(
            &counting(FeatureKind::PowerSpectrum, 1437, 396, 0.0),
            &counting(FeatureKind::De, 18, 310, 0.0),
            &counting(FeatureKind::Eye, 18, 33, 0.0),
        )
        .unwrap();
        assert_eq!(f.shape(), (1437, 739));
    }

    #[test]
    fn corpus_labels() {
        let a = counting(FeatureKind::Fused, 1437, 739, 0.0);
        let c = assemble_corpus(&[(a.clone(), EmotionLabel::Sad)]).unwrap();
        assert_eq!(c.data.dim(), (1437, 739));
        assert_eq!(c.labels.dim(), (1437, 5));
        assert!(c.labels.rows().into_iter().all(|r| r[2] == 1.0 && r.sum() == 1.0));

        let b = counting(FeatureKind::Fused, 3, 739, 5.0);
        let c = assemble_corpus(&[(a, EmotionLabel::Fear), (b, EmotionLabel::Happy)]).unwrap();
        let mut patterns: Vec<Vec<u64>> = c
            .labels
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        patterns.dedup();
        assert_eq!(patterns.len(), 2);
        assert_eq!(c.trial_of_row[1437], 1);
        assert_eq!(c.row_label(1438), EmotionLabel::Happy);
        assert!(assemble_corpus(&[]).is_err());
    }

    proptest! {
        #[test]
        fn plan_invariants(src in 1usize..200, extra in 0usize..2000) {
            let dst = src + extra;
            let p = compute_repeat_plan(src, dst).unwrap();
            prop_assert_eq!(p.dst_rows(), dst);
            let max = *p.counts().iter().max().unwrap();
            let min = *p.counts().iter().min().unwrap();
            prop_assert!(min >= 1 && max - min <= 1);
            prop_assert_eq!(p, compute_repeat_plan(src, dst).unwrap());
        }

        #[test]
        fn padding_preserves_row_order(src in 1usize..20, extra in 0usize..60) {
            let m = counting(FeatureKind::Eye, src, 2, 0.0);
            let p = pad_rows(&m, &compute_repeat_plan(src, src + extra).unwrap()).unwrap();
            let mut firsts = Vec::new();
            for r in p.data().rows() {
                let v = r[0];
                if firsts.last() != Some(&v) {
                    firsts.push(v);
                }
            }
            let original: Vec<f64> = m.data().column(0).to_vec();
            prop_assert_eq!(firsts, original);
        }
    }
}
