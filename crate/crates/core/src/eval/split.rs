use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, SplitMode};
use crate::error::{Error, Result};
use crate::fusion::Corpus;
use crate::label::N_CLASSES;
use crate::nn::train::onehot_to_targets;
use crate::rng::{derive_seed, seeded_rng};

const SPLIT_STREAM: u64 = 3;

/// Disjoint train/test row sets. Both lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub mode: SplitMode,
    pub stratified: bool,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Trial ids on each side (trial mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<(Vec<u32>, Vec<u32>)>,
}

impl SplitAssignment {
    pub fn n_rows(&self) -> usize {
        self.train.len() + self.test.len()
    }
}

/// `round_half_up(fraction * total)`.
///
/// The product is nudged by a few ulps first so that decimal fractions such
/// as 0.7 round the way their written value does (0.7 * 15 = 10.5 -> 11).
pub fn train_size(total: usize, fraction: f64) -> usize {
    let x = fraction * total as f64;
    let n = (x * (1.0 + 4.0 * f64::EPSILON) + 0.5).floor() as usize;
    n.min(total)
}

fn check_fraction(fraction: f64) -> Result<()> {
    if fraction > 0.0 && fraction < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("train fraction {fraction} outside (0, 1)")))
    }
}

/// Chooses which of `n` units go to training. With `strata`, each class is
/// split separately; the totals are then clamped so neither side is empty.
fn choose_units(n: usize, strata: Option<&[u8]>, fraction: f64, seed: u64) -> Vec<bool> {
    let mut rng = seeded_rng(derive_seed(seed, SPLIT_STREAM));
    let mut is_train = vec![false; n];
    let mut groups: Vec<Vec<usize>> = match strata {
        Some(s) => {
            let mut g = vec![Vec::new(); N_CLASSES];
            for (i, &c) in s.iter().enumerate() {
                g[c as usize].push(i);
            }
            g
        }
        None => vec![(0..n).collect()],
    };
    for g in &mut groups {
        g.shuffle(&mut rng);
        for &i in &g[..train_size(g.len(), fraction)] {
            is_train[i] = true;
        }
    }
    let n_train = is_train.iter().filter(|&&t| t).count();
    if n_train == 0 {
        is_train[groups.iter().flatten().next().copied().unwrap_or(0)] = true;
    } else if n_train == n {
        let last = groups.iter().rev().flat_map(|g| g.iter().rev()).next().copied().unwrap_or(0);
        is_train[last] = false;
    }
    is_train
}

/// Uniform random row split. `labels` enables per-class stratification.
pub fn split_rows(
    n_rows: usize,
    labels: Option<&[u8]>,
    fraction: f64,
    seed: u64,
) -> Result<SplitAssignment> {
    check_fraction(fraction)?;
    if n_rows < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n_rows });
    }
    if let Some(l) = labels {
        check_labels(l, n_rows)?;
    }
    let is_train = choose_units(n_rows, labels, fraction, seed);
    let (train, test) = partition(0..n_rows, |r| is_train[r]);
    Ok(SplitAssignment {
        mode: SplitMode::Window,
        stratified: labels.is_some(),
        seed,
        train,
        test,
        trials: None,
    })
}

/// Random split over trials; every row follows its trial.
pub fn split_trials(
    trial_of_row: &[u32],
    trial_labels: Option<&[u8]>,
    n_trials: usize,
    fraction: f64,
    seed: u64,
) -> Result<SplitAssignment> {
    check_fraction(fraction)?;
    if n_trials < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n_trials });
    }
    if let Some(&bad) = trial_of_row.iter().find(|&&t| t as usize >= n_trials) {
        return Err(Error::Shape(format!("row refers to trial {bad} of {n_trials}")));
    }
    if let Some(l) = trial_labels {
        check_labels(l, n_trials)?;
    }
    let is_train = choose_units(n_trials, trial_labels, fraction, seed);
    let (train, test) = partition(0..trial_of_row.len(), |r| is_train[trial_of_row[r] as usize]);
    let (train_trials, test_trials) = partition(0..n_trials, |t| is_train[t]);
    Ok(SplitAssignment {
        mode: SplitMode::Trial,
        stratified: trial_labels.is_some(),
        seed,
        train,
        test,
        trials: Some((
            train_trials.into_iter().map(|t| t as u32).collect(),
            test_trials.into_iter().map(|t| t as u32).collect(),
        )),
    })
}

/// Splits a corpus according to `cfg.split_mode`, `cfg.stratify`,
/// `cfg.train_fraction` and `cfg.rng_seed`.
pub fn split(corpus: &Corpus, cfg: &PipelineConfig) -> Result<SplitAssignment> {
    split_with_mode(corpus, cfg, cfg.split_mode)
}

pub fn split_with_mode(corpus: &Corpus, cfg: &PipelineConfig, mode: SplitMode) -> Result<SplitAssignment> {
    match mode {
        SplitMode::Window => {
            let targets = if cfg.stratify {
                Some(onehot_to_targets(corpus.labels.view())?)
            } else {
                None
            };
            split_rows(corpus.n_rows(), targets.as_deref(), cfg.train_fraction, cfg.rng_seed)
        }
        SplitMode::Trial => {
            let strata: Option<Vec<u8>> = cfg
                .stratify
                .then(|| corpus.trial_labels.iter().map(|l| l.code()).collect());
            split_trials(
                &corpus.trial_of_row,
                strata.as_deref(),
                corpus.n_trials(),
                cfg.train_fraction,
                cfg.rng_seed,
            )
        }
    }
}

fn check_labels(labels: &[u8], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} units", labels.len())));
    }
    match labels.iter().find(|&&c| c as usize >= N_CLASSES) {
        Some(&bad) => Err(Error::InvalidLabel(i64::from(bad))),
        None => Ok(()),
    }
}

fn partition(range: std::ops::Range<usize>, mut pred: impl FnMut(usize) -> bool) -> (Vec<usize>, Vec<usize>) {
    range.partition(|&i| pred(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_half_up_sizes() {
        assert_eq!(train_size(2_352_720, 0.7), 1_646_904);
        assert_eq!(train_size(258_660, 0.7), 181_062);
        assert_eq!(train_size(10, 0.7), 7);
        assert_eq!(train_size(15, 0.7), 11);
        assert_eq!(train_size(5, 0.5), 3);
        assert_eq!(train_size(3, 0.3), 1);
    }

    #[test]
    fn ten_rows_window_mode() {
        let s = split_rows(10, None, 0.7, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (7, 3));
    }

    #[test]
    fn never_leaves_a_side_empty() {
        let s = split_rows(2, None, 0.99, 4).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1, 1));
        let s = split_rows(3, None, 0.01, 4).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1, 2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(split_rows(1, None, 0.7, 0).is_err());
        assert!(split_rows(10, None, 1.0, 0).is_err());
        assert!(split_rows(10, None, 0.0, 0).is_err());
        assert!(split_trials(&[0, 0, 0], None, 1, 0.7, 0).is_err());
        assert!(split_rows(3, Some(&[0, 9, 1]), 0.5, 0).is_err());
    }

    #[test]
    fn stratified_keeps_class_proportions() {
        let labels: Vec<u8> = (0..100).map(|i| (i % 5) as u8).collect();
        let s = split_rows(100, Some(&labels), 0.7, 9).unwrap();
        for c in 0..5u8 {
            let n = s.train.iter().filter(|&&r| labels[r] == c).count();
            assert_eq!(n, 14);
        }
    }

    #[test]
    fn seed_changes_assignment_and_is_reproducible() {
        let a = split_rows(50, None, 0.7, 1).unwrap();
        let b = split_rows(50, None, 0.7, 1).unwrap();
        let c = split_rows(50, None, 0.7, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.train, c.train);
    }

    proptest! {
        #[test]
        fn partitions_rows(n in 2usize..300, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let s = split_rows(n, None, frac, seed).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert!(!s.train.is_empty() && !s.test.is_empty());
            let want = train_size(n, frac).clamp(1, n - 1);
            prop_assert_eq!(s.train.len(), want);
        }

        #[test]
        fn trial_mode_colocates_windows(
            sizes in proptest::collection::vec(1usize..20, 2..30),
            frac in 0.1f64..0.9,
            seed in any::<u64>(),
        ) {
            let trial_of_row: Vec<u32> = sizes
                .iter()
                .enumerate()
                .flat_map(|(t, &k)| std::iter::repeat_n(t as u32, k))
                .collect();
            let s = split_trials(&trial_of_row, None, sizes.len(), frac, seed).unwrap();
            let mut side = vec![None; sizes.len()];
            for (rows, flag) in [(&s.train, true), (&s.test, false)] {
                for &r in rows {
                    let t = trial_of_row[r] as usize;
                    prop_assert!(side[t].is_none() || side[t] == Some(flag));
                    side[t] = Some(flag);
                }
            }
            prop_assert_eq!(s.n_rows(), trial_of_row.len());
            let (tr, te) = s.trials.clone().unwrap();
            prop_assert_eq!(tr.len() + te.len(), sizes.len());
        }
    }
}
