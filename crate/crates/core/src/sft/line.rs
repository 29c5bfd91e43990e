use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::signal::{Dims, SampleSource};
use crate::window::WindowSpec;

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Line length `L = LCM(N_0, …, N_{D-1})`.
pub fn lcm_length(dims: &Dims) -> usize {
    dims.as_slice().iter().fold(1, |acc, &n| lcm(acc, n))
}

/// A discrete line `n_d(l) = [α_d·l + τ_d]_{N_d}`, `l ∈ [L]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpec {
    pub alpha: Vec<usize>,
    pub tau: Vec<usize>,
    pub len: usize,
}

impl LineSpec {
    /// Builds a line, checking the slope rule `gcd(α_d, N_d) = 1`.
    pub fn new(dims: &Dims, alpha: Vec<usize>, tau: Vec<usize>) -> Option<Self> {
        let ok = alpha.len() == dims.rank()
            && tau.len() == dims.rank()
            && alpha.iter().zip(dims.as_slice()).all(|(&a, &n)| a < n && gcd(a, n) == 1)
            && tau.iter().zip(dims.as_slice()).all(|(&t, &n)| t < n);
        ok.then(|| Self { alpha, tau, len: lcm_length(dims) })
    }

    /// Same slope, offset advanced by one sample along dimension `d`.
    pub fn shifted(&self, dims: &Dims, d: usize) -> Self {
        let mut tau = self.tau.clone();
        tau[d] = (tau[d] + 1) % dims.get(d);
        Self { alpha: self.alpha.clone(), tau, len: self.len }
    }

    /// Grid position of the `l`-th sample.
    pub fn position(&self, dims: &Dims, l: usize, out: &mut [usize]) {
        for (d, o) in out.iter_mut().enumerate() {
            let n = dims.get(d);
            *o = ((self.alpha[d] * (l % n)) % n + self.tau[d]) % n;
        }
    }

    pub fn positions(&self, dims: &Dims) -> Vec<Vec<usize>> {
        let mut buf = vec![0; dims.rank()];
        (0..self.len)
            .map(|l| {
                self.position(dims, l, &mut buf);
                buf.clone()
            })
            .collect()
    }
}

/// Draws a random line: each `α_d` uniform over the units mod `N_d`, each
/// `τ_d` uniform over `[N_d]`.
pub fn draw_line(dims: &Dims, rng: &mut impl Rng) -> LineSpec {
    let alpha = dims
        .as_slice()
        .iter()
        .map(|&n| loop {
            let a = rng.gen_range(1..n);
            if gcd(a, n) == 1 {
                break a;
            }
        })
        .collect();
    let tau = dims.as_slice().iter().map(|&n| rng.gen_range(0..n)).collect();
    LineSpec { alpha, tau, len: lcm_length(dims) }
}

fn unit_step(n: usize) -> usize {
    (1..n).filter(|&u| gcd(u, n) == 1).fold(n, |acc, u| gcd(acc, u - 1))
}

/// Whether grid frequencies `a` and `b` land in the same line bin for every
/// admissible slope. Such a pair can never be separated by redrawing lines:
/// with units-only slopes, `Σ_d δ_d·α_d·L/N_d ≡ 0 (mod L)` must then hold for
/// all unit vectors `α`, which reduces to the `α = 1` case plus, per
/// dimension, `δ_d·g_d·L/N_d ≡ 0` where `g_d = gcd{u − 1 : u unit mod N_d}`.
pub fn always_collide(dims: &Dims, a: &[usize], b: &[usize]) -> bool {
    let delta: Vec<usize> = dims.as_slice().iter().enumerate().map(|(d, &n)| (a[d] % n + n - b[d] % n) % n).collect();
    collides_with_zero(dims, &delta, &dims.as_slice().iter().map(|&n| unit_step(n)).collect::<Vec<_>>())
}

fn collides_with_zero(dims: &Dims, delta: &[usize], steps: &[usize]) -> bool {
    let l = lcm_length(dims);
    let per_dim = dims.as_slice().iter().zip(delta).zip(steps).all(|((&n, &dd), &g)| (dd * g % n) * (l / n) % l == 0);
    per_dim && delta.iter().zip(dims.as_slice()).map(|(&dd, &n)| dd * (l / n)).sum::<usize>() % l == 0
}

/// Every nonzero offset `δ` with `always_collide(m + δ, m)`; a subgroup of the grid.
pub fn collision_offsets(dims: &Dims) -> Vec<Vec<usize>> {
    let l = lcm_length(dims);
    let steps: Vec<usize> = dims.as_slice().iter().map(|&n| unit_step(n)).collect();
    let mut candidates = vec![vec![]];
    for (&n, &g) in dims.as_slice().iter().zip(&steps) {
        let ok: Vec<usize> = (0..n).filter(|&dd| (dd * g % n) * (l / n) % l == 0).collect();
        candidates = candidates
            .iter()
            .flat_map(|p: &Vec<usize>| ok.iter().map(move |&dd| [p.as_slice(), &[dd]].concat()))
            .collect();
    }
    candidates.into_iter().filter(|c| c.iter().any(|&v| v != 0) && collides_with_zero(dims, c, &steps)).collect()
}

/// Windowed samples along `line`: `w(n_l)·r(n_l)`.
pub fn extract_line(source: &SampleSource, window: &WindowSpec, line: &LineSpec) -> Vec<Complex64> {
    let dims = source.dims();
    let mut n = vec![0; dims.rank()];
    (0..line.len)
        .map(|l| {
            line.position(dims, l, &mut n);
            source.sample(&n) * window.at(&n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::collections::HashSet;

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_length(&Dims::new(vec![256, 256]).unwrap()), 256);
        assert_eq!(lcm_length(&Dims::new(vec![512, 256, 16]).unwrap()), 512);
        assert_eq!(lcm_length(&Dims::new(vec![16, 12]).unwrap()), 48);
    }

    #[test]
    fn slopes_are_units() {
        let dims = Dims::new(vec![4, 4]).unwrap();
        let mut r = rng::stream(&[1]);
        for _ in 0..200 {
            let line = draw_line(&dims, &mut r);
            assert!(line.alpha.iter().all(|a| *a == 1 || *a == 3));
        }
    }

    #[test]
    fn positions_are_distinct() {
        for lens in [vec![16, 12], vec![8, 6], vec![9, 6, 4], vec![256, 256]] {
            let dims = Dims::new(lens).unwrap();
            let mut r = rng::stream(&[2]);
            for _ in 0..50 {
                let line = draw_line(&dims, &mut r);
                let pos: HashSet<Vec<usize>> = line.positions(&dims).into_iter().collect();
                assert_eq!(pos.len(), line.len);
            }
        }
    }

    #[test]
    fn slope_draws_are_uniform() {
        // chi-square over the 8 × 4 admissible (α0, α1) pairs for 16 × 12
        let dims = Dims::new(vec![16, 12]).unwrap();
        let units0: Vec<usize> = (1..16).filter(|a| gcd(*a, 16) == 1).collect();
        let units1: Vec<usize> = (1..12).filter(|a| gcd(*a, 12) == 1).collect();
        let cells = units0.len() * units1.len();
        assert_eq!(cells, 32);
        let mut counts = std::collections::HashMap::new();
        let mut r = rng::stream(&[3]);
        let draws = 10_000;
        for _ in 0..draws {
            let line = draw_line(&dims, &mut r);
            *counts.entry((line.alpha[0], line.alpha[1])).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), cells);
        let expected = draws as f64 / cells as f64;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 31 dof: mean 31, sd ≈ 7.9; 4σ above the mean
        assert!(chi2 < 31.0 + 4.0 * 62f64.sqrt(), "chi2 = {chi2}");
        let sigma = (expected * (1.0 - 1.0 / cells as f64)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - expected).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn always_collide_matches_exhaustive_slopes() {
        use crate::sft::project_bin;
        for lens in [vec![4, 4], vec![8, 6], vec![16, 8], vec![9, 6, 4]] {
            let dims = Dims::new(lens.clone()).unwrap();
            let units: Vec<Vec<usize>> = lens.iter().map(|&n| (1..n).filter(|a| gcd(*a, n) == 1).collect()).collect();
            let mut slopes = vec![vec![]];
            for u in &units {
                slopes = slopes
                    .iter()
                    .flat_map(|p: &Vec<usize>| u.iter().map(move |&a| [p.clone(), vec![a]].concat()))
                    .collect();
            }
            let lines: Vec<LineSpec> =
                slopes.into_iter().map(|a| LineSpec::new(&dims, a, vec![0; lens.len()]).unwrap()).collect();
            let zero = vec![0; lens.len()];
            let mut hits = 0;
            for m in dims.indices() {
                let brute = lines.iter().all(|line| project_bin(&m, line, &dims) == project_bin(&zero, line, &dims));
                assert_eq!(always_collide(&dims, &m, &zero), brute, "{lens:?} {m:?}");
                hits += brute as usize;
                assert_eq!(brute && m != zero, collision_offsets(&dims).contains(&m));
            }
            assert!(hits >= 1);
        }
        let dims = Dims::new(vec![256, 256]).unwrap();
        assert_eq!(collision_offsets(&dims), vec![vec![128, 128]]);
        assert!(collision_offsets(&Dims::new(vec![512, 256, 16]).unwrap()).iter().all(|o| always_collide(
            &Dims::new(vec![512, 256, 16]).unwrap(),
            o,
            &[0, 0, 0]
        )));
        assert!(always_collide(&dims, &[195, 12], &[67, 140]));
        assert!(!always_collide(&dims, &[195, 12], &[67, 12]));
    }

    #[test]
    fn invalid_slope_rejected() {
        let dims = Dims::new(vec![16, 12]).unwrap();
        assert!(LineSpec::new(&dims, vec![2, 1], vec![0, 0]).is_none());
        assert!(LineSpec::new(&dims, vec![1, 5], vec![0, 0]).is_some());
    }
}
