use num_complex::Complex64;

use crate::recovery::Detection;
use crate::window::WindowSpec;

/// Standard deviation of the complex noise in one line-spectrum bin:
/// `σ_n·‖W‖₂ / √(N·L)`.
pub fn line_noise_sigma(noise_sigma: f64, window: &WindowSpec, line_len: usize) -> f64 {
    let total: usize = window.lengths().iter().product();
    noise_sigma * window.norm2 / ((total * line_len) as f64).sqrt()
}

/// Detection rule for noisy spectra: `κ·σ_line`, never below the relative
/// floating-point floor. Noiseless data under a flat window is treated as
/// exact content.
pub fn noise_detection(noise_sigma: f64, window: &WindowSpec, line_len: usize, kappa: f64) -> Detection {
    let exact = noise_sigma == 0.0 && window.is_flat();
    Detection {
        floor: kappa * line_noise_sigma(noise_sigma, window, line_len),
        relative: Detection::DEFAULT_RELATIVE,
        equal_magnitude: exact.then_some(Detection::EQUAL_MAGNITUDE_TOLERANCE),
    }
}

/// Bins whose magnitude exceeds `κ·σ_line`.
pub fn detect_bins(spectrum: &[Complex64], noise_sigma: f64, window: &WindowSpec, kappa: f64) -> Vec<usize> {
    let det = noise_detection(noise_sigma, window, spectrum.len(), kappa);
    let max = spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let threshold = det.threshold(max);
    (0..spectrum.len()).filter(|&m| spectrum[m].norm() > threshold).collect()
}
