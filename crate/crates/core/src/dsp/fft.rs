//! Radix-2 FFT plus a length-agnostic transform plan.
//!
//! Conventions: forward uses `exp(-i 2 pi k n / N)` with no scaling, inverse
//! uses `exp(+i 2 pi k n / N)` and divides by `N`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Forward DFT of a real signal whose length is a power of two.
pub fn fft(signal: &[f64]) -> Result<Vec<Complex64>> {
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut buf)?;
    Ok(buf)
}

pub fn fft_in_place(buf: &mut [Complex64]) -> Result<()> {
    Radix2::new(buf.len())?.process(buf, false);
    Ok(())
}

/// Normalised inverse of [`fft`].
pub fn ifft(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut buf = spectrum.to_vec();
    ifft_in_place(&mut buf)?;
    Ok(buf)
}

pub fn ifft_in_place(buf: &mut [Complex64]) -> Result<()> {
    Radix2::new(buf.len())?.process(buf, true);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(())
}

/// Iterative Cooley-Tukey with a precomputed twiddle table.
#[derive(Clone)]
pub struct Radix2 {
    n: usize,
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Shape(format!(
                "radix-2 FFT needs a power-of-two length, got {n}"
            )));
        }
        let twiddles = (0..n / 2)
            .map(|k| {
                let (s, c) = (-2.0 * PI * k as f64 / n as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        Ok(Radix2 { n, twiddles })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unscaled transform of one length-`n` block.
    pub fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..half {
                    let mut w = self.twiddles[j * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let u = buf[start + j];
                    let v = buf[start + j + half] * w;
                    buf[start + j] = u + v;
                    buf[start + j + half] = u - v;
                }
            }
            size *= 2;
        }
    }
}

enum Engine {
    Radix2(Radix2),
    Mixed {
        forward: Arc<dyn rustfft::Fft<f64>>,
        inverse: Arc<dyn rustfft::Fft<f64>>,
    },
}

/// Exact DFT plan for any length.
///
/// Power-of-two lengths run on [`Radix2`]; other lengths (200-sample windows,
/// 72000-sample trials) use rustfft's mixed-radix planner so no zero-padding
/// ever changes the bin grid.
pub struct Dft {
    len: usize,
    engine: Engine,
}

impl fmt::Debug for Dft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.engine {
            Engine::Radix2(_) => "radix2",
            Engine::Mixed { .. } => "mixed",
        };
        f.debug_struct("Dft")
            .field("len", &self.len)
            .field("engine", &kind)
            .finish()
    }
}

impl Dft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Empty("DFT of length 0".into()));
        }
        let engine = if len.is_power_of_two() {
            Engine::Radix2(Radix2::new(len)?)
        } else {
            let mut planner = FftPlanner::new();
            Engine::Mixed {
                forward: planner.plan_fft_forward(len),
                inverse: planner.plan_fft_inverse(len),
            }
        };
        Ok(Dft { len, engine })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Forward transform of every consecutive length-`len` block in `buf`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    /// Normalised inverse transform of every block in `buf`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(
            buf.len() % self.len,
            0,
            "buffer length {} is not a multiple of plan length {}",
            buf.len(),
            self.len
        );
        match &self.engine {
            Engine::Radix2(r) => {
                for block in buf.chunks_exact_mut(self.len) {
                    r.process(block, inverse);
                }
            }
            Engine::Mixed { forward, inverse: inv } => {
                let plan = if inverse { inv } else { forward };
                let mut scratch =
                    vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(buf, &mut scratch);
            }
        }
    }

    /// Forward transform of a real signal of exactly `len` samples.
    pub fn forward_real(&self, signal: &[f64]) -> Vec<Complex64> {
        assert_eq!(signal.len(), self.len);
        let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }
}
