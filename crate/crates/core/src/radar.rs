//! FMCW radar targets as multidimensional sinusoids.
//!
//! Axis order is (range, Doppler, angle) = (fast-time samples, pulses,
//! array elements). After de-chirping, a target at range `r` with Doppler
//! `f_d` and azimuth `θ` is a 3-D tone at
//! `ω = [2π(2ρr/c + f_d)/f_s, 2π f_d T_p, π sin θ]`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sft::GridSet;
use crate::signal::{circular_distance, Dims, Scene, Sinusoid};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    /// Carrier frequency, Hz.
    pub fc: f64,
    /// Chirp bandwidth, Hz.
    pub bandwidth: f64,
    /// Repetition interval, s.
    pub t_p: f64,
    /// Range samples per chirp.
    pub n0: usize,
    /// Pulses.
    pub n1: usize,
    /// Array elements.
    pub n2: usize,
    pub r_max: f64,
    /// Sampling rate, Hz; `None` means one chirp sampled across the interval, `N0/T_p`.
    #[serde(default)]
    pub fs: Option<f64>,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

impl Default for RadarParams {
    /// Long-range automotive configuration: 76 GHz, 200 MHz, 89 µs, 512×256×16, 300 m.
    fn default() -> Self {
        Self {
            fc: 76e9,
            bandwidth: 200e6,
            t_p: 89e-6,
            n0: 512,
            n1: 256,
            n2: 16,
            r_max: 300.0,
            fs: None,
            c: SPEED_OF_LIGHT,
        }
    }
}

impl RadarParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.fc, self.bandwidth, self.t_p, self.r_max, self.c, self.sample_rate()];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.n0 < 2 || self.n1 < 2 || self.n2 < 2 {
            return Err(Error::InvalidParameter("radar parameters must all be positive".into()));
        }
        Ok(())
    }

    /// Chirp rate `ρ = bandwidth / T_p`.
    pub fn chirp_rate(&self) -> f64 {
        self.bandwidth / self.t_p
    }

    pub fn sample_rate(&self) -> f64 {
        self.fs.unwrap_or(self.n0 as f64 / self.t_p)
    }

    pub fn dims(&self) -> Dims {
        Dims::new(vec![self.n0, self.n1, self.n2]).expect("radar dims are valid")
    }

    /// Range spanned by one range-axis DFT bin.
    pub fn range_bin(&self) -> f64 {
        self.c * self.sample_rate() / (2.0 * self.chirp_rate() * self.n0 as f64)
    }

    pub fn wavelength(&self) -> f64 {
        self.c / self.fc
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    /// m
    pub range: f64,
    /// Hz
    pub doppler: f64,
    /// rad
    pub azimuth: f64,
    pub amplitude: Complex64,
}

/// Normalized radian frequencies `[ω_range, ω_doppler, ω_angle]`, each in `[0, 2π)`.
pub fn target_to_freqs(target: &Target, params: &RadarParams) -> Vec<f64> {
    let beat = 2.0 * params.chirp_rate() * target.range / params.c + target.doppler;
    vec![
        (TAU * beat / params.sample_rate()).rem_euclid(TAU),
        (TAU * target.doppler * params.t_p).rem_euclid(TAU),
        (PI * target.azimuth.sin()).rem_euclid(TAU),
    ]
}

fn wrap_pi(w: f64) -> f64 {
    let x = w.rem_euclid(TAU);
    if x >= PI {
        x - TAU
    } else {
        x
    }
}

/// Inverse of [`target_to_freqs`]. Doppler is taken from the pulse axis
/// (unambiguous within `±1/(2T_p)`) and removed from the range frequency.
/// The returned amplitude is zero.
pub fn freqs_to_target(freqs: &[f64], params: &RadarParams) -> Result<Target> {
    if freqs.len() != 3 || freqs.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter(format!("expected three finite frequencies, got {freqs:?}")));
    }
    let doppler = wrap_pi(freqs[1]) / (TAU * params.t_p);
    let fs = params.sample_rate();
    let mut beat_turns = (freqs[0] - TAU * doppler / fs).rem_euclid(TAU) / TAU;
    // Within half a bin of the wrap point the beat frequency is a small negative one.
    if beat_turns > 1.0 - 0.5 / params.n0 as f64 {
        beat_turns -= 1.0;
    }
    let range = beat_turns * fs * params.c / (2.0 * params.chirp_rate());
    let sin_az = wrap_pi(freqs[2]) / PI;
    if sin_az.abs() > 1.0 {
        return Err(Error::InvalidParameter(format!("|sin θ| = {} exceeds 1", sin_az.abs())));
    }
    Ok(Target { range, doppler, azimuth: sin_az.asin(), amplitude: Complex64::new(0.0, 0.0) })
}

/// A target given by physical parameters and its SNR.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub range: f64,
    pub doppler: f64,
    /// degrees
    pub azimuth_deg: f64,
    pub snr_db: f64,
}

/// Target-scene config: radar parameters, targets and noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarScene {
    #[serde(default)]
    pub params: RadarParams,
    pub targets: Vec<TargetSpec>,
    #[serde(default = "one")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl RadarScene {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Ground-truth targets with amplitudes for the configured SNRs and random phases.
    pub fn targets(&self) -> Result<Vec<Target>> {
        use rand::Rng;
        let mut r = rng::stream(&[self.seed, 0x7A46E7]);
        self.targets
            .iter()
            .map(|t| {
                if !(0.0..=self.params.r_max).contains(&t.range) {
                    return Err(Error::InvalidParameter(format!("range {} outside [0, {}]", t.range, self.params.r_max)));
                }
                let mag = self.noise_sigma.max(f64::MIN_POSITIVE) * 10f64.powf(t.snr_db / 20.0);
                Ok(Target {
                    range: t.range,
                    doppler: t.doppler,
                    azimuth: t.azimuth_deg.to_radians(),
                    amplitude: Complex64::from_polar(mag, r.gen_range(0.0..TAU)),
                })
            })
            .collect()
    }

    pub fn scene(&self) -> Result<Scene> {
        self.params.validate()?;
        let sinusoids = self
            .targets()?
            .iter()
            .map(|t| Sinusoid::continuous(t.amplitude, target_to_freqs(t, &self.params)))
            .collect();
        Scene::new(self.params.dims(), sinusoids, self.noise_sigma, self.seed)
    }
}

/// A group of recovered grid frequencies excited by one underlying tone.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub members: Vec<(Vec<usize>, Complex64)>,
    pub energy: f64,
}

impl Cluster {
    /// Member with the largest magnitude.
    pub fn peak(&self) -> &(Vec<usize>, Complex64) {
        self.members
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("clusters are non-empty")
    }
}

fn linked(a: &[usize], b: &[usize], dims: &Dims, half_width: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .zip(dims.as_slice())
        .zip(half_width)
        .all(|(((&x, &y), &n), &hw)| circular_distance(x as f64, y as f64, n as f64) <= hw)
}

/// Single-linkage grouping: two frequencies share a cluster when their
/// circular distance is within the main-lobe half-width in every dimension.
/// Clusters come out sorted by descending energy.
pub fn cluster_consolidate(recovered: &GridSet, dims: &Dims, half_width: &[f64]) -> Vec<Cluster> {
    let items: Vec<(&Vec<usize>, &Complex64)> = recovered.iter().collect();
    let mut parent: Vec<usize> = (0..items.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if linked(items[i].0, items[j].0, dims, half_width) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(Vec<usize>, Complex64)>> = BTreeMap::new();
    for (i, (m, a)) in items.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(((*m).clone(), **a));
    }
    let mut clusters: Vec<Cluster> = groups
        .into_values()
        .map(|members| Cluster { energy: members.iter().map(|(_, a)| a.norm_sqr()).sum(), members })
        .collect();
    clusters.sort_by(|a, b| b.energy.total_cmp(&a.energy));
    clusters
}

/// Continuous frequency (in bins, per dimension) of a cluster's peak by
/// three-point parabolic interpolation of the log magnitude along each axis.
/// Falls back to the grid position where a neighbor is missing.
pub fn refine_peak(cluster: &Cluster, dims: &Dims) -> Vec<f64> {
    let lookup: BTreeMap<&Vec<usize>, f64> = cluster.members.iter().map(|(m, a)| (m, a.norm())).collect();
    let (peak, peak_amp) = cluster.peak();
    let center = peak_amp.norm();
    (0..dims.rank())
        .map(|d| {
            let n = dims.get(d);
            let neighbor = |step: usize| {
                let mut m = peak.clone();
                m[d] = (m[d] + step) % n;
                lookup.get(&m).copied()
            };
            let offset = match (neighbor(n - 1), neighbor(1)) {
                (Some(left), Some(right)) if left > 0.0 && right > 0.0 && center > 0.0 => {
                    let (a, b, c) = (left.ln(), center.ln(), right.ln());
                    let denom = a - 2.0 * b + c;
                    if denom < 0.0 {
                        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            };
            peak[d] as f64 + offset
        })
        .collect()
}

/// Converts bin positions to radian frequencies in `[0, 2π)`.
pub fn bins_to_radians(bins: &[f64], dims: &Dims) -> Vec<f64> {
    bins.iter()
        .zip(dims.as_slice())
        .map(|(&b, &n)| (TAU * b / n as f64).rem_euclid(TAU))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(range: f64, doppler: f64, azimuth: f64) -> Target {
        Target { range, doppler, azimuth, amplitude: Complex64::new(1.0, 0.0) }
    }

    #[test]
    fn defaults() {
        let p = RadarParams::default();
        assert!((p.chirp_rate() - 200e6 / 89e-6).abs() < 1e-3);
        assert!((p.range_bin() - p.c / (2.0 * p.bandwidth)).abs() < 1e-12);
        assert_eq!(p.dims().total(), 2_097_152);
    }

    #[test]
    fn broadside_and_half_cycle_doppler() {
        let p = RadarParams::default();
        let w = target_to_freqs(&target(10.0, 0.0, 0.0), &p);
        assert_eq!(w[2], 0.0);
        let w = target_to_freqs(&target(10.0, 1.0 / (2.0 * p.t_p), 0.0), &p);
        assert!((w[1] - PI).abs() < 1e-12);
    }

    #[test]
    fn range_round_trip() {
        let p = RadarParams::default();
        let t = freqs_to_target(&target_to_freqs(&target(150.0, 0.0, 0.0), &p), &p).unwrap();
        assert!((t.range - 150.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_special_values() {
        let p = RadarParams::default();
        let t = freqs_to_target(&[0.0, 0.0, PI / 2.0], &p).unwrap();
        assert!((t.azimuth - 30f64.to_radians()).abs() < 1e-12);
        let z = freqs_to_target(&[0.0, 0.0, 0.0], &p).unwrap();
        assert_eq!((z.range, z.doppler, z.azimuth), (0.0, 0.0, 0.0));
        assert!(freqs_to_target(&[0.0, 0.0], &p).is_err());
    }

    #[test]
    fn range_frequency_is_monotone() {
        let p = RadarParams::default();
        let mut last = -1.0;
        for i in 0..=30 {
            let w = target_to_freqs(&target(i as f64 * 10.0, 0.0, 0.0), &p)[0];
            assert!(w > last);
            last = w;
        }
    }

    #[test]
    fn cluster_grouping() {
        let dims = Dims::new(vec![64, 64]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let mut set = GridSet::new();
        set.insert(vec![10, 10], one);
        assert_eq!(cluster_consolidate(&set, &dims, &[1.0, 1.0]).len(), 1);
        set.insert(vec![11, 10], one);
        let c = cluster_consolidate(&set, &dims, &[1.0, 1.0]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].members.len(), 2);
        set.insert(vec![40, 63], one);
        set.insert(vec![40, 0], one);
        assert_eq!(cluster_consolidate(&set, &dims, &[1.0, 1.0]).len(), 2);
    }

    #[test]
    fn symmetric_neighbors_give_zero_offset() {
        let dims = Dims::new(vec![32]).unwrap();
        let c = Cluster {
            members: vec![
                (vec![4], Complex64::new(0.5, 0.0)),
                (vec![5], Complex64::new(1.0, 0.0)),
                (vec![6], Complex64::new(0.0, 0.5)),
            ],
            energy: 1.5,
        };
        assert_eq!(refine_peak(&c, &dims), vec![5.0]);
        let lone = Cluster { members: vec![(vec![7], Complex64::new(2.0, 0.0))], energy: 4.0 };
        assert_eq!(refine_peak(&lone, &dims), vec![7.0]);
    }
}
