use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1};
use crate::error::{Error, Result};

pub const STD_FLOOR: f64 = 1e-8;

/// Per-column standard-score statistics (population standard deviation).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerStats {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
    /// Columns whose standard deviation was floored at [`STD_FLOOR`].
    pub floored: Vec<usize>,
}

pub fn scaler_fit(train: ArrayView2<'_, f64>) -> Result<ScalerStats> {
    let rows: Vec<usize> = (0..train.nrows()).collect();
    ScalerStats::fit_rows(train, &rows)
}

pub fn scaler_transform(x: ArrayView2<'_, f64>, s: &ScalerStats) -> Result<Array2<f64>> {
    s.check_width(x.ncols())?;
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        s.transform_row(&mut row);
    }
    Ok(out)
}

impl ScalerStats {
    /// Fit on a subset of rows without copying them.
    pub fn fit_rows(data: ArrayView2<'_, f64>, rows: &[usize]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: rows.len(),
            });
        }
        let cols = data.ncols();
        let n = rows.len() as f64;
        let mut mean = Array1::<f64>::zeros(cols);
        for &r in rows {
            mean += &data.row(r);
        }
        mean /= n;
        let mut var = Array1::<f64>::zeros(cols);
        for &r in rows {
            for ((acc, &x), &m) in var.iter_mut().zip(data.row(r).iter()).zip(mean.iter()) {
                let d = x - m;
                *acc += d * d;
            }
        }
        let mut floored = Vec::new();
        let std = Array1::from_iter(var.iter().enumerate().map(|(c, &v)| {
            let s = (v / n).sqrt();
            if s < STD_FLOOR {
                floored.push(c);
                STD_FLOOR
            } else {
                s
            }
        }));
        if mean.iter().chain(std.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scaler statistics".into()));
        }
        if !floored.is_empty() {
            log::info!(
                "{} constant column(s) had their standard deviation floored",
                floored.len()
            );
        }
        Ok(ScalerStats { mean, std, floored })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn check_width(&self, cols: usize) -> Result<()> {
        if cols != self.width() {
            return Err(Error::Shape(format!(
                "scaler fitted on {} columns, got {cols}",
                self.width()
            )));
        }
        Ok(())
    }

    pub fn transform_row(&self, row: &mut ArrayViewMut1<'_, f64>) {
        for ((x, m), s) in row.iter_mut().zip(self.mean.iter()).zip(self.std.iter()) {
            *x = (*x - m) / s;
        }
    }

    pub fn transform_row_into(&self, src: ArrayView1<'_, f64>, mut dst: ArrayViewMut1<'_, f64>) {
        for (((d, &x), m), s) in dst
            .iter_mut()
            .zip(src.iter())
            .zip(self.mean.iter())
            .zip(self.std.iter())
        {
            *d = (x - m) / s;
        }
    }

    pub fn inverse_transform(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_width(z.ncols())?;
        let mut out = z.to_owned();
        for mut row in out.rows_mut() {
            for ((x, m), s) in row.iter_mut().zip(self.mean.iter()).zip(self.std.iter()) {
                *x = *x * s + m;
            }
        }
        Ok(out)
    }
}
