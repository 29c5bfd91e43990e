use std::f64::consts::TAU;

use num_complex::Complex64;

use super::line::LineSpec;
use super::project::{offset_turns, project_bin};
use crate::signal::Dims;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reject {
    BelowThreshold,
    ZeroBase,
    /// Decoded frequency does not project back to the bin it came from.
    Inconsistent,
}

/// Decodes the grid sinusoid behind bin `m`, assuming the bin is 1-sparse.
///
/// `shifted[d]` is the spectrum of the line whose offset was advanced by one
/// along dimension `d`; the phase step between it and `base` gives `m_d`.
pub fn decode_bin(
    base: &[Complex64],
    shifted: &[Vec<Complex64>],
    m: usize,
    line: &LineSpec,
    dims: &Dims,
    threshold: f64,
) -> Result<(Vec<usize>, Complex64), Reject> {
    let b = base[m];
    if b.norm() == 0.0 {
        return Err(Reject::ZeroBase);
    }
    if b.norm() <= threshold {
        return Err(Reject::BelowThreshold);
    }
    let freq: Vec<usize> = shifted
        .iter()
        .zip(dims.as_slice())
        .map(|(s, &n)| {
            let phase = (s[m] * b.conj()).arg();
            let k = (phase * n as f64 / TAU).round() as i64;
            k.rem_euclid(n as i64) as usize
        })
        .collect();
    if project_bin(&freq, line, dims) != m {
        return Err(Reject::Inconsistent);
    }
    let turns = offset_turns(&freq, line, dims);
    let amplitude = b * Complex64::from_polar(1.0, -TAU * turns as f64 / line.len as f64);
    Ok((freq, amplitude))
}
