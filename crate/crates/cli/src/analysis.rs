//! Ground truth and scoring shared by the experiments.

use num_complex::Complex64;
use rfps_core::oracle::{compare_points, full_dft, peak_extract, Metrics};
use rfps_core::radar::{cluster_consolidate, refine_peak};
use rfps_core::robust::line_noise_sigma;
use rand::Rng;
use rfps_core::sft::{collision_offsets, lcm_length};
use rfps_core::{make_scene, rng, Dims, GridSet, Result, SampleSource, Scene, SceneSpec, Sinusoid, WindowSpec};
use std::collections::HashSet;
use serde::Serialize;

/// Stream tags for [`derive_seed`].
pub const SCENE: u64 = 1;
pub const LINES: u64 = 2;

/// Per-trial seed from the run seed, the trial index and a purpose tag.
/// Line draws inside a run further split on (iteration, sub-iteration), so
/// every random choice is a pure function of (seed, trial, iteration, sub).
pub fn derive_seed(seed: u64, trial: usize, tag: u64) -> u64 {
    rng::stream_seed(&[seed, trial as u64, tag])
}

/// `K` equal-magnitude random tones at `snr_db`, separated by at least `min_sep` bins.
pub fn tone_scene(
    dims: &[usize],
    k: usize,
    snr_db: f64,
    noise_sigma: f64,
    min_sep: f64,
    on_grid: bool,
    seed: u64,
) -> Result<Scene> {
    // A noiseless scene keeps the amplitudes it would have at unit noise.
    let reference = if noise_sigma > 0.0 { noise_sigma } else { 1.0 };
    let a = SceneSpec::amplitude_for_snr(snr_db, reference);
    make_scene(&SceneSpec {
        dims: dims.to_vec(),
        k,
        a_min: a,
        a_max: a,
        noise_sigma,
        seed,
        on_grid,
        min_separation_bins: min_sep,
    })
}

/// `K` distinct on-grid tones, none of which shares a line bin with another on
/// every admissible line (see [`rfps_core::sft::always_collide`]). Such pairs
/// are unrecoverable by any number of iterations, so they are drawn out when
/// an experiment needs every trial to be able to finish.
pub fn resolvable_grid_scene(dims: &[usize], k: usize, snr_db: f64, noise_sigma: f64, seed: u64) -> Result<Scene> {
    let dims = Dims::new(dims.to_vec())?;
    let reference = if noise_sigma > 0.0 { noise_sigma } else { 1.0 };
    let a = SceneSpec::amplitude_for_snr(snr_db, reference);
    let offsets = collision_offsets(&dims);
    let blocked_per_tone = offsets.len() + 1;
    if k.saturating_mul(blocked_per_tone) >= dims.total() {
        return Err(rfps_core::Error::InvalidParameter(format!("K = {k} resolvable tones do not fit {dims}")));
    }
    let mut r = rng::stream(&[seed, 0x5CE7E]);
    let mut taken: HashSet<Vec<usize>> = HashSet::new();
    let mut sinusoids = Vec::with_capacity(k);
    while sinusoids.len() < k {
        let m: Vec<usize> = dims.as_slice().iter().map(|&n| r.gen_range(0..n)).collect();
        let partners = offsets.iter().map(|o| m.iter().zip(o).zip(dims.as_slice()).map(|((&x, &d), &n)| (x + d) % n).collect());
        if taken.contains(&m) || partners.clone().any(|p: Vec<usize>| taken.contains(&p)) {
            continue;
        }
        taken.insert(m.clone());
        let phase = r.gen_range(0.0..std::f64::consts::TAU);
        sinusoids.push(Sinusoid::grid(Complex64::from_polar(a, phase), m));
    }
    Scene::new(dims, sinusoids, noise_sigma, seed)
}

pub fn noiseless(scene: &Scene) -> Scene {
    Scene::new(scene.dims.clone(), scene.sinusoids.clone(), 0.0, scene.seed).expect("scene was valid")
}

/// Per-bin noise standard deviation of a line spectrum under `window`.
pub fn sigma_line(scene: &Scene, window: &WindowSpec) -> f64 {
    line_noise_sigma(scene.noise_sigma, window, lcm_length(&scene.dims))
}

/// Significant grid frequencies `S'`: bins of the noiseless windowed full
/// spectrum that a line-spectrum detector at `κ·σ_line` could see.
pub fn significant_set(scene: &Scene, window: &WindowSpec, kappa: f64) -> GridSet {
    let spectrum = full_dft(&SampleSource::new(noiseless(scene)), window);
    peak_extract(&spectrum, kappa * sigma_line(scene, window))
}

/// True tone positions in (continuous) bins with their amplitudes.
pub fn truth_points(scene: &Scene) -> Vec<(Vec<f64>, Complex64)> {
    scene.sinusoids.iter().map(|s| (s.freq.bins(&scene.dims), s.amplitude)).collect()
}

/// A recovered cluster reduced to its refined peak position.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterEstimate {
    pub bins: Vec<f64>,
    pub amplitude: Complex64,
    pub members: usize,
}

pub fn cluster_estimates(recovered: &GridSet, scene: &Scene, window: &WindowSpec) -> Vec<ClusterEstimate> {
    cluster_consolidate(recovered, &scene.dims, &window.main_lobe_half_width)
        .iter()
        .map(|c| ClusterEstimate {
            bins: refine_peak(c, &scene.dims),
            amplitude: c.peak().1,
            members: c.members.len(),
        })
        .collect()
}

/// Cluster-level score: a cluster detects a tone when its refined peak lies
/// inside the tone's main lobe; clusters matching no tone are false alarms.
pub fn cluster_metrics(recovered: &GridSet, scene: &Scene, window: &WindowSpec) -> (Metrics, usize) {
    let clusters = cluster_estimates(recovered, scene, window);
    let points: Vec<(Vec<f64>, Complex64)> = clusters.iter().map(|c| (c.bins.clone(), c.amplitude)).collect();
    let tol = window.main_lobe_half_width.iter().cloned().fold(0.0, f64::max);
    (compare_points(&points, &truth_points(scene), &scene.dims, tol), clusters.len())
}

/// Recovered grid frequencies outside `S'`.
pub fn false_frequencies(recovered: &GridSet, significant: &GridSet) -> usize {
    recovered.keys().filter(|m| !significant.contains_key(*m)).count()
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rfps_core::Sinusoid;

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(derive_seed(1, 2, SCENE), derive_seed(1, 2, SCENE));
        assert_ne!(derive_seed(1, 2, SCENE), derive_seed(1, 3, SCENE));
        assert_ne!(derive_seed(1, 2, SCENE), derive_seed(1, 2, LINES));
    }

    #[test]
    fn on_grid_significant_set_is_the_truth() {
        let scene = tone_scene(&[32, 16], 4, 20.0, 1.0, 0.0, true, 3).unwrap();
        let w = WindowSpec::rectangular(&scene.dims);
        let s = significant_set(&scene, &w, 5.0);
        assert_eq!(s.len(), 4);
        for (m, a) in truth_points(&scene) {
            let key: Vec<usize> = m.iter().map(|&v| v as usize).collect();
            assert!((s[&key] - a).norm() < 1e-9);
        }
    }

    #[test]
    fn resolvable_scene_has_no_permanent_pairs() {
        let dims = Dims::new(vec![16, 16]).unwrap();
        let scene = resolvable_grid_scene(&[16, 16], 60, 30.0, 1.0, 4).unwrap();
        let freqs: Vec<Vec<usize>> = truth_points(&scene).iter().map(|(m, _)| m.iter().map(|&v| v as usize).collect()).collect();
        assert_eq!(freqs.iter().collect::<HashSet<_>>().len(), 60);
        for (i, a) in freqs.iter().enumerate() {
            for b in &freqs[i + 1..] {
                assert!(!rfps_core::sft::always_collide(&dims, a, b));
            }
        }
        assert!(resolvable_grid_scene(&[4, 4], 8, 30.0, 1.0, 4).is_err());
    }

    #[test]
    fn exact_recovery_scores_perfectly() {
        let dims = rfps_core::Dims::new(vec![64, 64]).unwrap();
        let a = Complex64::new(10.0, 0.0);
        let scene = Scene::new(dims.clone(), vec![Sinusoid::grid(a, vec![5, 9])], 1.0, 0).unwrap();
        let w = WindowSpec::rectangular(&dims);
        let recovered: GridSet = [(vec![5, 9], a)].into_iter().collect();
        let (m, clusters) = cluster_metrics(&recovered, &scene, &w);
        assert_eq!((m.detections, m.misses, m.false_alarms, clusters), (1, 0, 0, 1));
        let extra: GridSet = [(vec![5, 9], a), (vec![40, 40], a)].into_iter().collect();
        assert_eq!(cluster_metrics(&extra, &scene, &w).0.false_alarms, 1);
        assert_eq!(mean([1.0, 2.0, 3.0]), 2.0);
    }
}
