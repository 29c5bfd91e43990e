//! Separable Dolph-Chebyshev windows and the PSR design rule.
//!
//! A `D`-dimensional window is the outer product of one taper per dimension.
//! It is never materialized: samples along a line only need
//! [`WindowSpec::at`], and the design rule only needs the two norms, which
//! factor over dimensions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Dims;

/// Zero-padding factor used for every PSR / main-lobe measurement.
pub const PSR_PAD: usize = 16;

/// Dolph-Chebyshev taps with equiripple sidelobes `psr_db` below the peak.
/// Peak tap is normalized to 1.
pub fn design_chebyshev(length: usize, psr_db: f64) -> Result<Vec<f64>> {
    if length < 8 {
        return Err(Error::InvalidParameter(format!("Chebyshev length must be >= 8, got {length}")));
    }
    if !(20.0..=120.0).contains(&psr_db) {
        return Err(Error::InvalidParameter(format!("PSR must lie in [20, 120] dB, got {psr_db}")));
    }
    let m = length;
    let order = (m - 1) as f64;
    let ripple = 10f64.powf(psr_db / 20.0);
    let beta = (ripple.acosh() / order).cosh();

    // Samples of the Chebyshev polynomial on the unit circle.
    let odd = m % 2 == 1;
    let p: Vec<Complex64> = (0..m)
        .map(|k| {
            let x = beta * (PI * k as f64 / m as f64).cos();
            let t = if x > 1.0 {
                (order * x.acosh()).cosh()
            } else if x < -1.0 {
                let sign = if odd { 1.0 } else { -1.0 };
                sign * (order * (-x).acosh()).cosh()
            } else {
                (order * x.acos()).cos()
            };
            if odd {
                Complex64::new(t, 0.0)
            } else {
                Complex64::from_polar(t, PI * k as f64 / m as f64)
            }
        })
        .collect();

    // Real part of the forward DFT, then unfold into a symmetric window.
    let spectrum: Vec<f64> = (0..m)
        .map(|n| {
            p.iter()
                .enumerate()
                .map(|(k, v)| (v * Complex64::from_polar(1.0, -2.0 * PI * (k * n % m) as f64 / m as f64)).re)
                .sum()
        })
        .collect();
    let mut w = Vec::with_capacity(m);
    if odd {
        let half = (m + 1) / 2;
        w.extend(spectrum[1..half].iter().rev());
        w.extend(&spectrum[..half]);
    } else {
        let half = m / 2 + 1;
        w.extend(spectrum[1..half].iter().rev());
        w.extend(&spectrum[1..half]);
    }
    let peak = w.iter().cloned().fold(f64::MIN, f64::max);
    if !(peak > 0.0) {
        return Err(Error::UnattainablePsr { length, psr_db, reason: "degenerate taps".into() });
    }
    w.iter_mut().for_each(|v| *v /= peak);
    if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::UnattainablePsr { length, psr_db, reason: "non-positive taps".into() });
    }

    let measured = measure_psr(&w);
    if (measured.psr_db - psr_db).abs() > 1.0 {
        return Err(Error::UnattainablePsr {
            length,
            psr_db,
            reason: format!("measured PSR {:.2} dB", measured.psr_db),
        });
    }
    Ok(w)
}

/// Spectral shape of a 1-D taper measured on a zero-padded spectrum.
#[derive(Clone, Copy, Debug)]
pub struct SpectralShape {
    pub psr_db: f64,
    /// Distance from the peak to the first null, in DFT bins of the unpadded length.
    pub main_lobe_half_width: f64,
}

/// Measures PSR and main-lobe half-width from a [`PSR_PAD`]× zero-padded spectrum.
pub fn measure_psr(taps: &[f64]) -> SpectralShape {
    let m = taps.len();
    let size = (m * PSR_PAD).next_power_of_two();
    let mut buf: Vec<Complex64> = taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    buf.resize(size, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    // Symmetric taps: linear phase, so the magnitude is even about DC.
    let mag: Vec<f64> = buf[..=size / 2].iter().map(|z| z.norm()).collect();
    let peak = mag[0];
    let mut null = 1;
    while null + 1 < mag.len() && mag[null + 1] < mag[null] {
        null += 1;
    }
    let side = mag[null..].iter().cloned().fold(0.0, f64::max);
    let psr_db = if side > 0.0 { 20.0 * (peak / side).log10() } else { f64::INFINITY };
    SpectralShape {
        psr_db,
        main_lobe_half_width: null as f64 * m as f64 / size as f64,
    }
}

/// A separable `D`-dimensional window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowSpec {
    pub taps_per_dim: Vec<Vec<f64>>,
    /// `‖W‖₁` of the full window.
    pub norm1: f64,
    /// `‖W‖₂` (Frobenius) of the full window.
    pub norm2: f64,
    /// Peak-to-sidelobe ratio of the full window, dB.
    pub psr_db: f64,
    /// Main-lobe half-width per dimension, in bins.
    pub main_lobe_half_width: Vec<f64>,
}

impl WindowSpec {
    pub fn from_taps(taps_per_dim: Vec<Vec<f64>>, psr_db: Option<f64>) -> Result<Self> {
        if taps_per_dim.is_empty() || taps_per_dim.iter().any(|t| t.is_empty()) {
            return Err(Error::InvalidParameter("window needs non-empty taps per dimension".into()));
        }
        let norm1 = taps_per_dim.iter().map(|t| t.iter().map(|v| v.abs()).sum::<f64>()).product();
        let norm2 = taps_per_dim
            .iter()
            .map(|t| t.iter().map(|v| v * v).sum::<f64>().sqrt())
            .product();
        let shapes: Vec<SpectralShape> = taps_per_dim.iter().map(|t| measure_psr(t)).collect();
        // The separable sidelobe peak sits on an axis: main lobe times the worst 1-D sidelobe.
        let measured = shapes.iter().map(|s| s.psr_db).fold(f64::INFINITY, f64::min);
        Ok(Self {
            norm1,
            norm2,
            psr_db: psr_db.unwrap_or(measured),
            main_lobe_half_width: shapes.iter().map(|s| s.main_lobe_half_width).collect(),
            taps_per_dim,
        })
    }

    pub fn rectangular(dims: &Dims) -> Self {
        Self::from_taps(dims.as_slice().iter().map(|&n| vec![1.0; n]).collect(), None)
            .expect("rectangular taps are valid")
    }

    /// Constant taps in every dimension, i.e. a scaled rectangular window.
    pub fn is_flat(&self) -> bool {
        self.taps_per_dim.iter().all(|t| t.iter().all(|&v| v == t[0]))
    }

    pub fn chebyshev(dims: &Dims, psr_db: f64) -> Result<Self> {
        let taps = dims
            .as_slice()
            .iter()
            .map(|&n| design_chebyshev(n, psr_db))
            .collect::<Result<Vec<_>>>()?;
        Self::from_taps(taps, Some(psr_db))
    }

    pub fn rank(&self) -> usize {
        self.taps_per_dim.len()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.taps_per_dim.iter().map(|t| t.len()).collect()
    }

    pub fn is_rectangular(&self) -> bool {
        self.taps_per_dim.iter().flatten().all(|&v| v == 1.0)
    }

    /// Window value at grid index `n`: `Π_d taps_d[n_d]`.
    #[inline]
    pub fn at(&self, n: &[usize]) -> f64 {
        self.taps_per_dim.iter().zip(n).map(|(t, &i)| t[i]).product()
    }

    /// Taps of one dimension as a plain newline-separated column.
    pub fn export_column(&self, dim: usize) -> String {
        let mut out = String::new();
        for v in &self.taps_per_dim[dim] {
            out.push_str(&format!("{v:.17e}\n"));
        }
        out
    }
}

/// Window value at grid index `n`.
pub fn window_at(window: &WindowSpec, n: &[usize]) -> f64 {
    window.at(n)
}

/// Lower limit on the window PSR (dB) so the strongest tone's sidelobes sit
/// below the noise floor; callers should design strictly above it.
///
/// The norm ratio enters as an amplitude (20·log10) and `√SNR_max` as a
/// power-like factor (10·log10), i.e. +10 dB threshold per +20 dB SNR.
pub fn min_psr(snr_max_db: f64, window: &WindowSpec) -> f64 {
    let ratio = 2.0 * window.norm1 / (PI.sqrt() * window.norm2);
    20.0 * ratio.log10() + snr_max_db / 2.0
}

/// Fixed point of `ρ = min_psr(SNR_max, chebyshev(ρ))`: the design-rule PSR
/// evaluated on the Chebyshev window that the rule itself selects.
pub fn chebyshev_design_psr(dims: &Dims, snr_max_db: f64) -> Result<f64> {
    let mut psr: f64 = 60.0;
    for _ in 0..20 {
        let next = min_psr(snr_max_db, &WindowSpec::chebyshev(dims, psr.clamp(20.0, 120.0))?);
        if (next - psr).abs() < 1e-6 {
            return Ok(next);
        }
        psr = next;
    }
    Ok(psr)
}

#[cfg(test)]
mod tests {
    use super::*;

    // scipy.signal.windows.chebwin(9, 60) and chebwin(16, 50).
    const CHEB_9_60: [f64; 9] = [
        0.05186856359432414,
        0.22712393362332253,
        0.5379172015600897,
        0.8604844373949189,
        1.0,
        0.8604844373949189,
        0.5379172015600897,
        0.22712393362332253,
        0.05186856359432414,
    ];
    const CHEB_16_50: [f64; 16] = [
        0.04987235173801798,
        0.12288619729493606,
        0.24400354555985454,
        0.4057269637667984,
        0.5912380833624428,
        0.7729959633678337,
        0.918757608157483,
        1.0,
        1.0,
        0.918757608157483,
        0.7729959633678337,
        0.5912380833624428,
        0.4057269637667984,
        0.24400354555985454,
        0.12288619729493606,
        0.04987235173801798,
    ];

    #[test]
    fn matches_reference_taps() {
        for (want, got) in CHEB_9_60.iter().zip(design_chebyshev(9, 60.0).unwrap()) {
            assert!((want - got).abs() < 1e-12, "{want} vs {got}");
        }
        for (want, got) in CHEB_16_50.iter().zip(design_chebyshev(16, 50.0).unwrap()) {
            assert!((want - got).abs() < 1e-12, "{want} vs {got}");
        }
    }

    #[test]
    fn measured_psr_close_to_design() {
        let w = design_chebyshev(64, 60.0).unwrap();
        let s = measure_psr(&w);
        assert!((59.0..=61.0).contains(&s.psr_db), "{}", s.psr_db);
        for &(len, psr) in &[(256, 45.0), (256, 70.0), (512, 90.0), (16, 70.0), (8, 120.0)] {
            let s = measure_psr(&design_chebyshev(len, psr).unwrap());
            assert!((s.psr_db - psr).abs() < 1.0, "len {len} psr {psr}: {}", s.psr_db);
        }
    }

    #[test]
    fn taps_symmetric_positive_peak_one() {
        for len in [8, 9, 64, 255, 256] {
            let w = design_chebyshev(len, 70.0).unwrap();
            assert_eq!(w.len(), len);
            assert!((w.iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 1e-15);
            for i in 0..len {
                assert!((w[i] - w[len - 1 - i]).abs() < 1e-12);
                assert!(w[i] > 0.0);
            }
        }
    }

    #[test]
    fn main_lobe_grows_with_psr() {
        let narrow = measure_psr(&design_chebyshev(256, 45.0).unwrap());
        let wide = measure_psr(&design_chebyshev(256, 70.0).unwrap());
        assert!(wide.main_lobe_half_width > narrow.main_lobe_half_width);
    }

    #[test]
    fn rectangular_psr_is_sinc_sidelobe() {
        let s = measure_psr(&vec![1.0; 64]);
        assert!((s.psr_db - 13.26).abs() < 0.05, "{}", s.psr_db);
        assert!((s.main_lobe_half_width - 1.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_design_parameters() {
        assert!(design_chebyshev(7, 60.0).is_err());
        assert!(design_chebyshev(64, 10.0).is_err());
        assert!(design_chebyshev(64, 130.0).is_err());
    }

    #[test]
    fn separable_norms_match_materialized() {
        let dims = Dims::new(vec![16, 12]).unwrap();
        let w = WindowSpec::chebyshev(&dims, 50.0).unwrap();
        let (mut l1, mut l2) = (0.0, 0.0);
        for i in 0..16 {
            for j in 0..12 {
                let v = w.taps_per_dim[0][i] * w.taps_per_dim[1][j];
                l1 += v.abs();
                l2 += v * v;
                assert_eq!(window_at(&w, &[i, j]), v);
            }
        }
        assert!((w.norm1 - l1).abs() / l1 < 1e-12);
        assert!((w.norm2 - l2.sqrt()).abs() / l2.sqrt() < 1e-12);
    }

    #[test]
    fn rectangular_window_is_one_everywhere() {
        let dims = Dims::new(vec![4, 6]).unwrap();
        let w = WindowSpec::rectangular(&dims);
        assert!(w.is_rectangular());
        for n in dims.indices() {
            assert_eq!(w.at(&n), 1.0);
        }
        assert_eq!(w.norm1, 24.0);
        assert!((w.norm2 - 24f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn min_psr_shifts_ten_db_per_twenty_db_snr() {
        let dims = Dims::new(vec![64, 64]).unwrap();
        let w = WindowSpec::chebyshev(&dims, 60.0).unwrap();
        let d = min_psr(40.0, &w) - min_psr(20.0, &w);
        assert!((d - 10.0).abs() < 1e-12);
    }

    #[test]
    fn export_is_one_value_per_line() {
        let dims = Dims::new(vec![8, 9]).unwrap();
        let w = WindowSpec::chebyshev(&dims, 60.0).unwrap();
        let col = w.export_column(1);
        let vals: Vec<f64> = col.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(vals, w.taps_per_dim[1]);
    }
}
