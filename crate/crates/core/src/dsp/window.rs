use crate::error::{Error, Result};

/// A borrowed window of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<'a> {
    pub samples: &'a [f64],
    pub channel: usize,
    pub start_index: usize,
}

impl Window<'_> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `floor((n - w) / h) + 1`; trailing samples past the last full window are dropped.
pub fn window_count(n: usize, window_len: usize, hop: usize) -> Result<usize> {
    if window_len == 0 || hop == 0 {
        return Err(Error::InvalidConfig(format!(
            "window length and hop must be >= 1 (got {window_len}, {hop})"
        )));
    }
    if n < window_len {
        return Err(Error::InsufficientSamples {
            needed: window_len,
            got: n,
        });
    }
    Ok((n - window_len) / hop + 1)
}

pub fn slide_windows(signal: &[f64], window_len: usize, hop: usize) -> Result<Vec<Window<'_>>> {
    slide_channel_windows(signal, 0, window_len, hop)
}

pub fn slide_channel_windows(
    signal: &[f64],
    channel: usize,
    window_len: usize,
    hop: usize,
) -> Result<Vec<Window<'_>>> {
    let count = window_count(signal.len(), window_len, hop)?;
    Ok((0..count)
        .map(|i| {
            let start = i * hop;
            Window {
                samples: &signal[start..start + window_len],
                channel,
                start_index: start,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_trial_window_count() {
        assert_eq!(window_count(72000, 200, 50).unwrap(), 1437);
    }

    #[test]
    fn single_window() {
        let x = [0.0; 8];
        let w = slide_windows(&x, 8, 1).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].start_index, 0);
    }

    #[test]
    fn uneven_tail_dropped() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let w = slide_windows(&x, 4, 3).unwrap();
        let starts: Vec<_> = w.iter().map(|w| w.start_index).collect();
        assert_eq!(starts, [0, 3, 6]);
        assert_eq!(w[2].samples, &[6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            slide_windows(&[0.0; 3], 4, 1),
            Err(Error::InsufficientSamples { needed: 4, got: 3 })
        ));
    }

    proptest! {
        #[test]
        fn count_matches_enumeration(n in 1usize..400, w in 1usize..64, h in 1usize..32) {
            prop_assume!(n >= w);
            let mut expected = 0;
            let mut start = 0;
            while start + w <= n {
                expected += 1;
                start += h;
            }
            let x = vec![0.0; n];
            prop_assert_eq!(slide_windows(&x, w, h).unwrap().len(), expected);
        }
    }
}
