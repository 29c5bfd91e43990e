//! Brute-force reference: the full multidimensional DFT of the windowed
//! signal, peak extraction, and set comparison metrics.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::sft::GridSet;
use crate::signal::{circular_distance, Dims, SampleSource};
use crate::window::WindowSpec;

/// Full DFT on the grid, row-major, scaled by `1/N` so a unit on-grid tone
/// under a rectangular window shows up as a unit bin.
#[derive(Clone, Debug)]
pub struct FullSpectrum {
    pub dims: Dims,
    pub values: Vec<Complex64>,
}

impl FullSpectrum {
    pub fn at(&self, m: &[usize]) -> Complex64 {
        self.values[self.dims.linear_index(m)]
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

fn windowed_samples(source: &SampleSource, window: &WindowSpec) -> Vec<Complex64> {
    source.dims().indices().map(|n| source.sample(&n) * window.at(&n)).collect()
}

/// Separable FFT along each axis. Reads every sample once.
pub fn full_dft(source: &SampleSource, window: &WindowSpec) -> FullSpectrum {
    let dims = source.dims().clone();
    let mut values = windowed_samples(source, window);
    fft_nd(&dims, &mut values);
    let scale = 1.0 / dims.total() as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    FullSpectrum { dims, values }
}

/// In-place unscaled forward DFT of a row-major array.
pub fn fft_nd(dims: &Dims, values: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    let lens = dims.as_slice();
    let mut stride = 1;
    for d in (0..lens.len()).rev() {
        let len = lens[d];
        let fft = planner.plan_fft_forward(len);
        let block = len * stride;
        let mut buf = vec![Complex64::default(); len];
        for outer in (0..values.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = values[base + k * stride];
                }
                fft.process(&mut buf);
                for (k, b) in buf.iter().enumerate() {
                    values[base + k * stride] = *b;
                }
            }
        }
        stride = block;
    }
}

/// Direct `O(N²)` summation; for checking [`full_dft`] on small grids.
pub fn full_dft_direct(source: &SampleSource, window: &WindowSpec) -> FullSpectrum {
    let dims = source.dims().clone();
    let samples = windowed_samples(source, window);
    let positions: Vec<Vec<usize>> = dims.indices().collect();
    let n = dims.total() as f64;
    let values = positions
        .iter()
        .map(|m| {
            let mut acc = Complex64::default();
            for (p, x) in positions.iter().zip(&samples) {
                let turns: f64 = m
                    .iter()
                    .zip(p)
                    .zip(dims.as_slice())
                    .map(|((&md, &nd), &len)| ((md * nd) % len) as f64 / len as f64)
                    .sum();
                acc += x * Complex64::from_polar(1.0, -std::f64::consts::TAU * turns);
            }
            acc / n
        })
        .collect();
    FullSpectrum { dims, values }
}

/// Every bin whose magnitude exceeds `threshold`.
pub fn peak_extract(spectrum: &FullSpectrum, threshold: f64) -> GridSet {
    spectrum
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > threshold)
        .map(|(i, v)| (spectrum.dims.unravel(i), *v))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub detections: usize,
    pub misses: usize,
    pub false_alarms: usize,
    /// RMS of the amplitude error over matched pairs; 0 when nothing matched.
    pub amplitude_rmse: f64,
}

/// Greedy matching of estimated to true points. True points are taken in
/// order of descending magnitude; each claims the nearest unclaimed estimate
/// whose circular distance is at most `tolerance` bins in every dimension.
pub fn compare_points(
    estimated: &[(Vec<f64>, Complex64)],
    truth: &[(Vec<f64>, Complex64)],
    dims: &Dims,
    tolerance: f64,
) -> Metrics {
    let mut order: Vec<usize> = (0..truth.len()).collect();
    order.sort_by(|&a, &b| truth[b].1.norm().total_cmp(&truth[a].1.norm()));
    let mut claimed = vec![false; estimated.len()];
    let mut sq_err = 0.0;
    let mut detections = 0;
    for t in order {
        let (tf, ta) = &truth[t];
        let best = estimated
            .iter()
            .enumerate()
            .filter(|(i, _)| !claimed[*i])
            .map(|(i, (ef, _))| {
                let dist = ef
                    .iter()
                    .zip(tf)
                    .zip(dims.as_slice())
                    .map(|((&e, &f), &n)| circular_distance(e, f, n as f64))
                    .fold(0.0, f64::max);
                (i, dist)
            })
            .filter(|(_, dist)| *dist <= tolerance)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, _)) = best {
            claimed[i] = true;
            detections += 1;
            sq_err += (estimated[i].1 - ta).norm_sqr();
        }
    }
    Metrics {
        detections,
        misses: truth.len() - detections,
        false_alarms: estimated.len() - detections,
        amplitude_rmse: if detections > 0 { (sq_err / detections as f64).sqrt() } else { 0.0 },
    }
}

/// [`compare_points`] for grid sets.
pub fn compare_sets(estimated: &GridSet, truth: &GridSet, dims: &Dims, tolerance: f64) -> Metrics {
    let to_points = |s: &GridSet| -> Vec<(Vec<f64>, Complex64)> {
        s.iter().map(|(m, a)| (m.iter().map(|&v| v as f64).collect(), *a)).collect()
    };
    compare_points(&to_points(estimated), &to_points(truth), dims, tolerance)
}
