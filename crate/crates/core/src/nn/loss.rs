use ndarray::ArrayView2;

use crate::error::{Error, Result};

pub const PROB_FLOOR: f64 = 1e-12;

/// Mean over rows of `-sum(y * ln p)`, with `p` clamped to `[1e-12, 1]`.
pub fn cross_entropy(probs: ArrayView2<'_, f64>, onehot: ArrayView2<'_, f64>) -> Result<f64> {
    if probs.dim() != onehot.dim() {
        return Err(Error::Shape(format!(
            "probabilities {:?} vs labels {:?}",
            probs.dim(),
            onehot.dim()
        )));
    }
    if probs.nrows() == 0 {
        return Err(Error::Empty("cross-entropy of an empty batch".into()));
    }
    Ok(row_losses(probs, onehot).iter().sum::<f64>() / probs.nrows() as f64)
}

pub(crate) fn row_losses(probs: ArrayView2<'_, f64>, onehot: ArrayView2<'_, f64>) -> Vec<f64> {
    probs.rows().into_iter().zip(onehot.rows()).map(|(p, y)| {
        p.iter()
            .zip(y.iter())
            .filter(|(_, &y)| y != 0.0)
            .map(|(&p, &y)| -y * p.clamp(PROB_FLOOR, 1.0).ln())
            .sum::<f64>()
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn perfect_prediction_is_zero() {
        let p = array![[0.0, 1.0, 0.0, 0.0, 0.0]];
        assert_eq!(cross_entropy(p.view(), p.view()).unwrap(), 0.0);
    }

    #[test]
    fn uniform_is_ln5() {
        let p = ndarray::Array2::from_elem((3, 5), 0.2);
        let y = array![
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0]
        ];
        assert!((cross_entropy(p.view(), y.view()).unwrap() - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_row_hand_case() {
        let p = array![[0.7, 0.1, 0.1, 0.05, 0.05], [0.2, 0.2, 0.4, 0.1, 0.1]];
        let y = array![[1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0]];
        // (-ln 0.7 - ln 0.2) / 2
        let want = 0.983_056_428_186_416_4;
        assert!((cross_entropy(p.view(), y.view()).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_is_clamped() {
        let p = array![[0.0, 1.0, 0.0, 0.0, 0.0]];
        let y = array![[1.0, 0.0, 0.0, 0.0, 0.0]];
        let l = cross_entropy(p.view(), y.view()).unwrap();
        assert!((l - (-PROB_FLOOR.ln())).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let p = array![[0.2, 0.2, 0.2, 0.2, 0.2]];
        let y = array![[1.0, 0.0, 0.0, 0.0]];
        assert!(cross_entropy(p.view(), y.view()).is_err());
    }
}
