use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse transforms of one length.
///
/// Forward carries the `1/L` factor, inverse is unscaled, so
/// `inverse(forward(x)) == x`.
#[derive(Clone)]
pub struct LineDft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl LineDft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        self.forward.process(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        self.inverse.process(buf);
    }
}

/// `L`-point DFT with `1/L` normalization.
pub fn line_dft(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    if !buf.is_empty() {
        LineDft::new(buf.len()).forward_in_place(&mut buf);
    }
    buf
}

/// Inverse of [`line_dft`].
pub fn line_idft(spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    if !buf.is_empty() {
        LineDft::new(buf.len()).inverse_in_place(&mut buf);
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use std::f64::consts::TAU;

    fn random(len: usize, seed: u64) -> Vec<Complex64> {
        let mut r = rng::stream(&[seed]);
        (0..len).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
    }

    fn direct(x: &[Complex64]) -> Vec<Complex64> {
        let l = x.len();
        (0..l)
            .map(|m| {
                x.iter()
                    .enumerate()
                    .map(|(n, v)| v * Complex64::from_polar(1.0, -TAU * ((n * m) % l) as f64 / l as f64))
                    .sum::<Complex64>()
                    / l as f64
            })
            .collect()
    }

    #[test]
    fn constant_input() {
        let c = Complex64::new(0.7, -0.2);
        let s = line_dft(&[c; 32]);
        assert!((s[0] - c).norm() < 1e-15);
        assert!(s[1..].iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn matches_direct_summation() {
        for len in [48, 64, 37, 1] {
            let x = random(len, len as u64);
            for (a, b) in line_dft(&x).iter().zip(direct(&x)) {
                assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn round_trip() {
        let x = random(512, 9);
        let back = line_idft(&line_dft(&x));
        let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() <= 1e-9 * scale);
        }
    }
}
