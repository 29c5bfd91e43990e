//! Frequency projection: where a grid frequency lands in a line spectrum and
//! what value it contributes there.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use super::dft::LineDft;
use super::line::LineSpec;
use crate::signal::Dims;

/// Recovered grid frequencies keyed by their index vector.
pub type GridSet = BTreeMap<Vec<usize>, Complex64>;

/// Line-spectrum bin receiving grid frequency `m`: `[Σ_d m_d α_d L/N_d]_L`.
pub fn project_bin(m: &[usize], line: &LineSpec, dims: &Dims) -> usize {
    let l = line.len as u64;
    m.iter()
        .zip(&line.alpha)
        .zip(dims.as_slice())
        .fold(0u64, |acc, ((&m, &a), &n)| {
            let n = n as u64;
            (acc + (m as u64 * a as u64 % n) * (l / n)) % l
        }) as usize
}

/// Offset phase turns `[Σ_d m_d τ_d L/N_d]_L` (in units of `1/L`).
pub fn offset_turns(m: &[usize], line: &LineSpec, dims: &Dims) -> usize {
    let l = line.len as u64;
    m.iter()
        .zip(&line.tau)
        .zip(dims.as_slice())
        .fold(0u64, |acc, ((&m, &t), &n)| {
            let n = n as u64;
            (acc + (m as u64 * t as u64 % n) * (l / n)) % l
        }) as usize
}

/// Shared per-run state for one grid: line length, twiddles and planned DFTs.
#[derive(Clone)]
pub struct LineContext {
    pub dims: Dims,
    pub dft: LineDft,
    twiddles: Vec<Complex64>,
}

impl LineContext {
    pub fn new(dims: &Dims) -> Self {
        let len = super::line::lcm_length(dims);
        Self {
            dims: dims.clone(),
            dft: LineDft::new(len),
            twiddles: (0..len).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / len as f64)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.twiddles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.twiddles.is_empty()
    }

    /// `exp(j2π Σ_d m_d τ_d / N_d)`.
    pub fn offset_phasor(&self, m: &[usize], line: &LineSpec) -> Complex64 {
        self.twiddles[offset_turns(m, line, &self.dims)]
    }

    /// Adds the projection of `set` onto `line` into `spectrum` with the given sign.
    pub fn accumulate(&self, set: &GridSet, line: &LineSpec, sign: f64, spectrum: &mut [Complex64]) {
        for (m, a) in set {
            spectrum[project_bin(m, line, &self.dims)] += a * self.offset_phasor(m, line) * sign;
        }
    }

    pub fn project(&self, set: &GridSet, line: &LineSpec) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        self.accumulate(set, line, 1.0, &mut out);
        out
    }
}

/// Line spectrum produced by a set of grid sinusoids.
pub fn project_set(recovered: &GridSet, line: &LineSpec, dims: &Dims) -> Vec<Complex64> {
    LineContext::new(dims).project(recovered, line)
}

/// Removes the time-domain contribution of `recovered` from line samples.
pub fn subtract_recovered(values: &[Complex64], recovered: &GridSet, line: &LineSpec, dims: &Dims) -> Vec<Complex64> {
    let ctx = LineContext::new(dims);
    let mut synth = ctx.project(recovered, line);
    ctx.dft.inverse_in_place(&mut synth);
    values.iter().zip(synth).map(|(v, s)| v - s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sft::line::{draw_line, lcm_length};

    #[test]
    fn zero_frequency_projects_to_zero() {
        let dims = Dims::new(vec![16, 12]).unwrap();
        let mut r = rng::stream(&[0]);
        let line = draw_line(&dims, &mut r);
        assert_eq!(project_bin(&[0, 0], &line, &dims), 0);
    }

    #[test]
    fn direct_formula_example() {
        let dims = Dims::new(vec![16, 12]).unwrap();
        let line = LineSpec::new(&dims, vec![1, 1], vec![0, 0]).unwrap();
        assert_eq!(project_bin(&[1, 0], &line, &dims), 3);
        assert_eq!(lcm_length(&dims), 48);
    }

    #[test]
    fn empty_and_single() {
        let dims = Dims::new(vec![16, 12]).unwrap();
        let line = LineSpec::new(&dims, vec![3, 5], vec![2, 7]).unwrap();
        assert!(project_set(&GridSet::new(), &line, &dims).iter().all(|v| v.norm() == 0.0));
        let mut set = GridSet::new();
        set.insert(vec![4, 9], Complex64::new(1.5, 0.5));
        let s = project_set(&set, &line, &dims);
        let nz: Vec<usize> = (0..s.len()).filter(|&i| s[i].norm() > 0.0).collect();
        assert_eq!(nz, vec![project_bin(&[4, 9], &line, &dims)]);
    }
}
