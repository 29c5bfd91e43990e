//! Sinusoid scenes and the lazily evaluated noisy sample field.
//!
//! A [`Scene`] is a superposition of `D`-dimensional complex sinusoids on an
//! `N_0 × … × N_{D-1}` grid plus circularly symmetric Gaussian noise. The
//! noise is a fixed realization addressed by sample index, so any two reads of
//! the same position agree bit for bit no matter which line they belong to.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest `N` for which a full `exp(j2πk/N)` table is cached for gridded scenes.
const MAX_TWIDDLE_TABLE: usize = 1 << 20;

const SCENE_STREAM: u64 = 0x5CE7E;

/// Per-dimension lengths `N_d` of the sampling grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(lengths: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::InvalidDims("at least one dimension is required".into()));
        }
        if let Some(&bad) = lengths.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidDims(format!("every length must be >= 2, got {bad}")));
        }
        lengths
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::InvalidDims("total size overflows".into()))?;
        Ok(Self(lengths))
    }

    /// Number of dimensions `D`.
    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// Total number of samples `N = Π N_d`.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, d: usize) -> usize {
        self.0[d]
    }

    /// Row-major linear index (last dimension fastest).
    pub fn linear_index(&self, n: &[usize]) -> usize {
        debug_assert_eq!(n.len(), self.0.len());
        n.iter().zip(&self.0).fold(0, |acc, (&i, &len)| acc * len + i)
    }

    /// Inverse of [`Dims::linear_index`].
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for d in (0..self.0.len()).rev() {
            out[d] = idx % self.0[d];
            idx /= self.0[d];
        }
        out
    }

    pub fn contains(&self, n: &[usize]) -> bool {
        n.len() == self.0.len() && n.iter().zip(&self.0).all(|(&i, &len)| i < len)
    }

    /// Iterates over every grid index in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.total()).map(move |i| self.unravel(i))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Frequency of a sinusoid: normalized radians in `[0, 2π)` or integer grid indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Freq {
    Continuous(Vec<f64>),
    Grid(Vec<usize>),
}

impl Freq {
    /// Radian frequency vector; grid indices map to `2π m_d / N_d`.
    pub fn radians(&self, dims: &Dims) -> Vec<f64> {
        match self {
            Freq::Continuous(w) => w.clone(),
            Freq::Grid(m) => m
                .iter()
                .zip(dims.as_slice())
                .map(|(&m, &n)| TAU * m as f64 / n as f64)
                .collect(),
        }
    }

    /// Frequency in units of grid bins per dimension.
    pub fn bins(&self, dims: &Dims) -> Vec<f64> {
        match self {
            Freq::Continuous(w) => w
                .iter()
                .zip(dims.as_slice())
                .map(|(&w, &n)| w * n as f64 / TAU)
                .collect(),
            Freq::Grid(m) => m.iter().map(|&m| m as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub amplitude: Complex64,
    pub freq: Freq,
}

impl Sinusoid {
    pub fn continuous(amplitude: Complex64, freq: Vec<f64>) -> Self {
        Self { amplitude, freq: Freq::Continuous(freq) }
    }

    pub fn grid(amplitude: Complex64, freq: Vec<usize>) -> Self {
        Self { amplitude, freq: Freq::Grid(freq) }
    }
}

/// A set of sinusoids on a sampling grid plus complex white Gaussian noise.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scene {
    pub dims: Dims,
    pub sinusoids: Vec<Sinusoid>,
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(skip)]
    twiddles: OnceLock<Vec<Complex64>>,
}

impl PartialEq for Scene {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims
            && self.sinusoids == other.sinusoids
            && self.noise_sigma == other.noise_sigma
            && self.seed == other.seed
    }
}

impl Scene {
    pub fn new(dims: Dims, sinusoids: Vec<Sinusoid>, noise_sigma: f64, seed: u64) -> Result<Self> {
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("noise_sigma must be finite and >= 0, got {noise_sigma}")));
        }
        for s in &sinusoids {
            let ok = match &s.freq {
                Freq::Continuous(w) => w.len() == dims.rank() && w.iter().all(|x| x.is_finite()),
                Freq::Grid(m) => dims.contains(m),
            };
            if !ok {
                return Err(Error::InvalidParameter(format!("sinusoid frequency {:?} does not fit dims {dims}", s.freq)));
            }
        }
        Ok(Self { dims, sinusoids, noise_sigma, seed, twiddles: OnceLock::new() })
    }

    /// Number of sinusoids `K`.
    pub fn k(&self) -> usize {
        self.sinusoids.len()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.sinusoids.iter().map(|s| s.amplitude.norm()).fold(0.0, f64::max)
    }

    /// `(max |a| / σ_n)²` in dB; infinite for a noiseless scene.
    pub fn snr_max_db(&self) -> f64 {
        let a = self.max_amplitude();
        if self.noise_sigma == 0.0 {
            f64::INFINITY
        } else {
            20.0 * (a / self.noise_sigma).log10()
        }
    }

    /// Noise-free signal value `Σ a·exp(j n·ω)` at grid index `n`.
    pub fn eval(&self, n: &[usize]) -> Complex64 {
        debug_assert!(self.dims.contains(n));
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.sinusoids {
            acc += s.amplitude * self.phasor(&s.freq, n);
        }
        acc
    }

    fn phasor(&self, freq: &Freq, n: &[usize]) -> Complex64 {
        match freq {
            Freq::Continuous(w) => {
                let phase: f64 = w.iter().zip(n).map(|(&w, &i)| w * i as f64).sum();
                let (s, c) = phase.sin_cos();
                Complex64::new(c, s)
            }
            Freq::Grid(m) => {
                // Exact reduction to k/N turns before the one transcendental.
                let total = self.dims.total() as u64;
                let mut k = 0u64;
                for ((&m, &i), &len) in m.iter().zip(n).zip(self.dims.as_slice()) {
                    let len = len as u64;
                    k = (k + (m as u64 * i as u64 % len) * (total / len)) % total;
                }
                match self.twiddle_table() {
                    Some(t) => t[k as usize],
                    None => {
                        let (s, c) = (TAU * k as f64 / total as f64).sin_cos();
                        Complex64::new(c, s)
                    }
                }
            }
        }
    }

    fn twiddle_table(&self) -> Option<&[Complex64]> {
        let total = self.dims.total();
        if total > MAX_TWIDDLE_TABLE || !self.sinusoids.iter().any(|s| matches!(s.freq, Freq::Grid(_))) {
            return None;
        }
        Some(self.twiddles.get_or_init(|| {
            (0..total)
                .map(|k| {
                    let (s, c) = (TAU * k as f64 / total as f64).sin_cos();
                    Complex64::new(c, s)
                })
                .collect()
        }))
    }

    /// Noise realization at `n` (zero when `σ_n = 0`).
    pub fn noise(&self, n: &[usize]) -> Complex64 {
        if self.noise_sigma == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (g0, g1) = rng::normal_pair(self.seed, self.dims.linear_index(n) as u64);
        Complex64::new(g0, g1) * (self.noise_sigma * std::f64::consts::FRAC_1_SQRT_2)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: Scene = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Scene::new(raw.dims, raw.sinusoids, raw.noise_sigma, raw.seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Noise-free signal value of `scene` at grid index `n`.
pub fn eval_signal(scene: &Scene, n: &[usize]) -> Complex64 {
    scene.eval(n)
}

/// Parameters for [`make_scene`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneSpec {
    pub dims: Vec<usize>,
    pub k: usize,
    pub a_min: f64,
    pub a_max: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Draw integer grid frequencies instead of continuous ones.
    #[serde(default)]
    pub on_grid: bool,
    /// Minimum Chebyshev (max over dimensions) circular distance between
    /// continuous frequencies, in bins. Zero disables the constraint.
    #[serde(default)]
    pub min_separation_bins: f64,
}

impl SceneSpec {
    /// Amplitude giving the requested per-sinusoid SNR (dB) at the given noise level.
    pub fn amplitude_for_snr(snr_db: f64, noise_sigma: f64) -> f64 {
        noise_sigma * 10f64.powf(snr_db / 20.0)
    }
}

/// Circular distance between two positions on a ring of circumference `len`.
pub fn circular_distance(a: f64, b: f64, len: f64) -> f64 {
    let d = (a - b).rem_euclid(len);
    d.min(len - d)
}

/// Draws a random scene: uniform phases, magnitudes uniform in `[a_min, a_max]`,
/// frequencies uniform on the torus (or on the grid without repeats).
pub fn make_scene(spec: &SceneSpec) -> Result<Scene> {
    let dims = Dims::new(spec.dims.clone())?;
    if !(spec.a_min > 0.0 && spec.a_min <= spec.a_max && spec.a_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a_min <= a_max, got [{}, {}]",
            spec.a_min, spec.a_max
        )));
    }
    let total = dims.total();
    if spec.k >= total {
        return Err(Error::InvalidParameter(format!("K = {} must be below N = {total}", spec.k)));
    }
    if spec.on_grid && spec.k > total / 2 {
        return Err(Error::RejectionSampling { wanted: spec.k, attempts: 0 });
    }

    let mut rng = rng::stream(&[spec.seed, SCENE_STREAM]);
    let mut sinusoids = Vec::with_capacity(spec.k);
    let max_attempts = 1000 * spec.k.max(1);
    let mut attempts = 0;

    if spec.on_grid {
        let mut taken = std::collections::HashSet::new();
        while sinusoids.len() < spec.k {
            attempts += 1;
            if attempts > max_attempts {
                return Err(Error::RejectionSampling { wanted: spec.k, attempts });
            }
            let m: Vec<usize> = dims.as_slice().iter().map(|&n| rng.gen_range(0..n)).collect();
            if taken.insert(m.clone()) {
                let a = draw_amplitude(&mut rng, spec.a_min, spec.a_max);
                sinusoids.push(Sinusoid::grid(a, m));
            }
        }
    } else {
        let mut placed: Vec<Vec<f64>> = Vec::with_capacity(spec.k);
        while sinusoids.len() < spec.k {
            attempts += 1;
            if attempts > max_attempts {
                return Err(Error::RejectionSampling { wanted: spec.k, attempts });
            }
            let w: Vec<f64> = dims.as_slice().iter().map(|_| rng.gen_range(0.0..TAU)).collect();
            let bins: Vec<f64> = w.iter().zip(dims.as_slice()).map(|(&w, &n)| w * n as f64 / TAU).collect();
            let separated = placed.iter().all(|other| {
                bins.iter()
                    .zip(other)
                    .zip(dims.as_slice())
                    .map(|((&a, &b), &n)| circular_distance(a, b, n as f64))
                    .fold(0.0, f64::max)
                    >= spec.min_separation_bins
            });
            if separated {
                placed.push(bins);
                let a = draw_amplitude(&mut rng, spec.a_min, spec.a_max);
                sinusoids.push(Sinusoid::continuous(a, w));
            }
        }
    }
    Scene::new(dims, sinusoids, spec.noise_sigma, spec.seed)
}

fn draw_amplitude(rng: &mut impl Rng, a_min: f64, a_max: f64) -> Complex64 {
    let mag = if a_min == a_max { a_min } else { rng.gen_range(a_min..=a_max) };
    Complex64::from_polar(mag, rng.gen_range(0.0..TAU))
}

/// Lazily evaluated noisy samples of a scene, counting distinct reads.
///
/// Shareable across threads; the read counter is a lock-free bitset.
pub struct SampleSource {
    scene: Scene,
    seen: Vec<AtomicU64>,
    distinct: AtomicUsize,
}

impl SampleSource {
    pub fn new(scene: Scene) -> Self {
        let words = scene.dims.total().div_ceil(64);
        Self {
            scene,
            seen: (0..words).map(|_| AtomicU64::new(0)).collect(),
            distinct: AtomicUsize::new(0),
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn dims(&self) -> &Dims {
        &self.scene.dims
    }

    /// Noisy sample `y(n) + noise(n)`.
    pub fn sample(&self, n: &[usize]) -> Complex64 {
        let idx = self.scene.dims.linear_index(n);
        let bit = 1u64 << (idx % 64);
        if self.seen[idx / 64].fetch_or(bit, Ordering::Relaxed) & bit == 0 {
            self.distinct.fetch_add(1, Ordering::Relaxed);
        }
        self.scene.eval(n) + self.scene.noise(n)
    }

    /// Number of distinct indices read so far.
    pub fn distinct_reads(&self) -> usize {
        self.distinct.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        for w in &self.seen {
            w.store(0, Ordering::Relaxed);
        }
        self.distinct.store(0, Ordering::Relaxed);
    }
}

/// Convenience: noisy sample of `source` at `n`.
pub fn sample(source: &SampleSource, n: &[usize]) -> Complex64 {
    source.sample(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dims_validation() {
        assert!(Dims::new(vec![]).is_err());
        assert!(Dims::new(vec![4, 1]).is_err());
        let d = Dims::new(vec![16, 12]).unwrap();
        assert_eq!(d.total(), 192);
        assert_eq!(d.linear_index(&[1, 2]), 14);
        assert_eq!(d.unravel(14), vec![1, 2]);
        assert_eq!(d.to_string(), "16x12");
    }

    #[test]
    fn dc_and_half_period() {
        let dims = Dims::new(vec![4, 4]).unwrap();
        let dc = Scene::new(dims.clone(), vec![Sinusoid::continuous(c(1.0, 0.0), vec![0.0, 0.0])], 0.0, 0).unwrap();
        assert_eq!(eval_signal(&dc, &[3, 2]), c(1.0, 0.0));
        let half = Scene::new(dims, vec![Sinusoid::continuous(c(1.0, 0.0), vec![PI, 0.0])], 0.0, 0).unwrap();
        let v = eval_signal(&half, &[1, 0]);
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_matches_term_by_term_sum() {
        let spec = SceneSpec {
            dims: vec![16, 12],
            k: 3,
            a_min: 0.5,
            a_max: 2.0,
            noise_sigma: 0.0,
            seed: 11,
            on_grid: false,
            min_separation_bins: 0.0,
        };
        let scene = make_scene(&spec).unwrap();
        let n = [2usize, 3];
        let mut want = c(0.0, 0.0);
        for s in &scene.sinusoids {
            let Freq::Continuous(w) = &s.freq else { unreachable!() };
            let ph = w[0] * 2.0 + w[1] * 3.0;
            want += s.amplitude * c(ph.cos(), ph.sin());
        }
        assert!((eval_signal(&scene, &n) - want).norm() < 1e-12);
    }

    #[test]
    fn grid_phasor_matches_direct() {
        let dims = Dims::new(vec![16, 12]).unwrap();
        let a = c(0.3, -1.1);
        let scene = Scene::new(dims.clone(), vec![Sinusoid::grid(a, vec![5, 7])], 0.0, 0).unwrap();
        for n in dims.indices() {
            let ph = TAU * (5.0 * n[0] as f64 / 16.0 + 7.0 * n[1] as f64 / 12.0);
            let want = a * c(ph.cos(), ph.sin());
            assert!((scene.eval(&n) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn make_scene_fixed_amplitude_and_determinism() {
        let spec = SceneSpec {
            dims: vec![256, 256],
            k: 10,
            a_min: SceneSpec::amplitude_for_snr(30.0, 1.0),
            a_max: SceneSpec::amplitude_for_snr(30.0, 1.0),
            noise_sigma: 1.0,
            seed: 5,
            on_grid: false,
            min_separation_bins: 8.0,
        };
        let scene = make_scene(&spec).unwrap();
        assert_eq!(scene.k(), 10);
        for s in &scene.sinusoids {
            assert!((s.amplitude.norm() - 10f64.powf(1.5)).abs() < 1e-9);
        }
        assert!((scene.snr_max_db() - 30.0).abs() < 1e-9);
        assert_eq!(scene, make_scene(&spec).unwrap());
    }

    #[test]
    fn degenerate_on_grid_scene() {
        let spec = SceneSpec {
            dims: vec![4, 4],
            k: 1,
            a_min: 1.0,
            a_max: 1.0,
            noise_sigma: 0.0,
            seed: 0,
            on_grid: true,
            min_separation_bins: 0.0,
        };
        let scene = make_scene(&spec).unwrap();
        assert_eq!(scene.k(), 1);
        assert!(matches!(scene.sinusoids[0].freq, Freq::Grid(_)));
        assert_eq!(scene.noise(&[1, 1]), c(0.0, 0.0));
    }

    #[test]
    fn on_grid_too_dense_is_rejected() {
        let spec = SceneSpec {
            dims: vec![4, 4],
            k: 9,
            a_min: 1.0,
            a_max: 1.0,
            noise_sigma: 0.0,
            seed: 0,
            on_grid: true,
            min_separation_bins: 0.0,
        };
        assert!(matches!(make_scene(&spec), Err(Error::RejectionSampling { .. })));
    }

    #[test]
    fn impossible_separation_is_rejected() {
        let spec = SceneSpec {
            dims: vec![8, 8],
            k: 5,
            a_min: 1.0,
            a_max: 1.0,
            noise_sigma: 0.0,
            seed: 0,
            on_grid: false,
            min_separation_bins: 4.5,
        };
        assert!(matches!(make_scene(&spec), Err(Error::RejectionSampling { .. })));
    }

    #[test]
    fn noiseless_sample_is_signal_and_reads_are_distinct() {
        let spec = SceneSpec {
            dims: vec![16, 12],
            k: 3,
            a_min: 1.0,
            a_max: 1.0,
            noise_sigma: 0.0,
            seed: 2,
            on_grid: true,
            min_separation_bins: 0.0,
        };
        let src = SampleSource::new(make_scene(&spec).unwrap());
        let v = src.sample(&[3, 4]);
        assert_eq!(v, src.scene().eval(&[3, 4]));
        let again = src.sample(&[3, 4]);
        assert_eq!(v.re.to_bits(), again.re.to_bits());
        assert_eq!(v.im.to_bits(), again.im.to_bits());
        assert_eq!(src.distinct_reads(), 1);
        src.sample(&[0, 0]);
        assert_eq!(src.distinct_reads(), 2);
        src.reset_counter();
        assert_eq!(src.distinct_reads(), 0);
    }

    #[test]
    fn noise_power_and_component_variance() {
        let dims = Dims::new(vec![400, 250]).unwrap();
        let scene = Scene::new(dims.clone(), vec![], 1.0, 99).unwrap();
        let n = dims.total() as f64;
        let (mut p, mut vr, mut vi) = (0.0, 0.0, 0.0);
        for idx in dims.indices() {
            let z = scene.noise(&idx);
            p += z.norm_sqr();
            vr += z.re * z.re;
            vi += z.im * z.im;
        }
        assert!((p / n - 1.0).abs() < 0.02, "power {}", p / n);
        // var of the sample variance of N(0, 1/2) is 2·(1/2)²/n
        let tol = 3.0 * (0.5f64 / n).sqrt();
        assert!((vr / n - 0.5).abs() < tol);
        assert!((vi / n - 0.5).abs() < tol);
    }

    #[test]
    fn scene_toml_round_trip() {
        let spec = SceneSpec {
            dims: vec![16, 12],
            k: 3,
            a_min: 1.0,
            a_max: 2.0,
            noise_sigma: 0.25,
            seed: 17,
            on_grid: true,
            min_separation_bins: 0.0,
        };
        let scene = make_scene(&spec).unwrap();
        let text = scene.to_toml().unwrap();
        assert_eq!(Scene::from_toml(&text).unwrap(), scene);
    }
}
