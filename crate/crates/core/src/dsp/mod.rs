//! Signal processing: windowing, FFT, band power and differential entropy.

pub mod entropy;
pub mod fft;
pub mod filter;
pub mod power;
pub mod window;

pub use entropy::{differential_entropy, extract_de, Entropy};
pub use fft::{fft, ifft, Complex64, Dft};
pub use filter::{bandpass, downsample, BandSplitter};
pub use power::{bin_power, extract_power_spectrum, BandPower, BandPowerPlan, Spectrum};
pub use window::{slide_windows, window_count, Window};
