//! Lower bound on the per-iteration probability of localizing a cluster's
//! dominant frequency, and the iteration-count prediction built on it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::vote::VotingConfig;
use crate::error::{Error, Result};
use crate::signal::Dims;
use crate::window::WindowSpec;

pub const SIGMA_P_MIN: f64 = 1.0 / (2.0 * PI);
pub const SIGMA_P_MAX: f64 = 0.5;
pub const SIGMA_P_DEFAULT: f64 = 1.0 / 6.0;

/// Probability that a remaining frequency lands alone in its line bin:
/// `(1 − |S''|/N)^{N/L − 1}`.
pub fn p1(s_remaining: usize, n: usize, l: usize) -> f64 {
    let exponent = (n / l) as f64 - 1.0;
    (1.0 - s_remaining as f64 / n as f64).powf(exponent)
}

/// Rayleigh CDF `1 − exp(−x²/(2σ²))`, zero for `x ≤ 0`.
pub fn rayleigh_cdf(x: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if sigma == 0.0 {
        1.0
    } else {
        -(-x * x / (2.0 * sigma * sigma)).exp_m1()
    }
}

/// Lower bound on correct decoding of a 1-sparse bin, `Π_d (1 − P_d)` with
/// `P_d = (σ_p·(1 − F(δ_d)))²`, `δ_d = aπ‖W‖₁/(2N·N_d)` and Rayleigh scale
/// `σ² = σ_n²‖W‖₂²/(2NL)`.
pub fn pw(amplitude: f64, window: &WindowSpec, dims: &Dims, sigma_n: f64, sigma_p: f64, l: usize) -> f64 {
    pw_from_norms(amplitude, window.norm1, window.norm2, dims, sigma_n, sigma_p, l)
}

fn pw_from_norms(amplitude: f64, norm1: f64, norm2: f64, dims: &Dims, sigma_n: f64, sigma_p: f64, l: usize) -> f64 {
    let n = dims.total() as f64;
    let sigma = (sigma_n * sigma_n * norm2 * norm2 / (2.0 * n * l as f64)).sqrt();
    dims.as_slice()
        .iter()
        .map(|&nd| {
            let delta = amplitude * PI * norm1 / (2.0 * n * nd as f64);
            let err = (sigma_p * (1.0 - rayleigh_cdf(delta, sigma))).powi(2);
            1.0 - err
        })
        .product()
}

/// Complementary cumulative binomial: probability of at least `n_d`
/// successes in `n_s` trials of success probability `p`.
pub fn pd_bound(n_s: usize, n_d: usize, p: f64) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for k in 0..=n_s {
        if k > 0 {
            binom = binom * (n_s + 1 - k) as f64 / k as f64;
        }
        if k >= n_d {
            total += binom * p.powi(k as i32) * (1.0 - p).powi((n_s - k) as i32);
        }
    }
    total.clamp(0.0, 1.0)
}

/// Everything the bound needs besides the remaining-set size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundParams {
    pub dims: Dims,
    pub line_len: usize,
    pub sigma_p: f64,
    pub sigma_n: f64,
    pub norm1: f64,
    pub norm2: f64,
    /// Amplitude `a` of the dominant sinusoid.
    pub amplitude: f64,
    pub voting: VotingConfig,
}

impl BoundParams {
    pub fn new(
        dims: Dims,
        window: &WindowSpec,
        sigma_n: f64,
        sigma_p: f64,
        amplitude: f64,
        voting: VotingConfig,
    ) -> Result<Self> {
        if !(SIGMA_P_MIN - 1e-12..=SIGMA_P_MAX + 1e-12).contains(&sigma_p) {
            return Err(Error::InvalidParameter(format!(
                "sigma_p must lie in [1/(2π), 1/2], got {sigma_p}"
            )));
        }
        Ok(Self {
            line_len: crate::sft::lcm_length(&dims),
            dims,
            sigma_p,
            sigma_n,
            norm1: window.norm1,
            norm2: window.norm2,
            amplitude,
            voting,
        })
    }

    pub fn p1(&self, s_remaining: usize) -> f64 {
        p1(s_remaining, self.dims.total(), self.line_len)
    }

    pub fn pw(&self) -> f64 {
        pw_from_norms(
            self.amplitude,
            self.norm1,
            self.norm2,
            &self.dims,
            self.sigma_n,
            self.sigma_p,
            self.line_len,
        )
    }

    /// Per-iteration localization lower bound with `s_remaining` frequencies left.
    pub fn pd(&self, s_remaining: usize) -> f64 {
        pd_bound(self.voting.n_s, self.voting.n_d, self.p1(s_remaining) * self.pw())
    }

    pub fn row(&self, s_remaining: usize) -> BoundRow {
        BoundRow {
            s_remaining,
            p1: self.p1(s_remaining),
            pw: self.pw(),
            pd: self.pd(s_remaining),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub s_remaining: usize,
    pub p1: f64,
    pub pw: f64,
    pub pd: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredictedStep {
    pub iteration: usize,
    pub remaining_before: usize,
    pub pd: f64,
    pub recovered: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Prediction {
    pub iterations: usize,
    pub schedule: Vec<PredictedStep>,
    /// False when the recursion stalled (`P_d = 0`) or hit the iteration cap.
    pub converged: bool,
}

/// Upper estimate of the iterations needed to recover `s_prime` frequencies
/// under the least-recovery model: each iteration recovers `⌈|S''|·P_d(|S''|)⌉`
/// of the remaining ones.
pub fn predict_iterations(s_prime: usize, params: &BoundParams, max_iterations: usize) -> Prediction {
    let mut remaining = s_prime;
    let mut schedule = Vec::new();
    while remaining > 0 {
        if schedule.len() >= max_iterations {
            return Prediction { iterations: schedule.len(), schedule, converged: false };
        }
        let pd = params.pd(remaining);
        if pd <= 0.0 {
            return Prediction { iterations: schedule.len(), schedule, converged: false };
        }
        let recovered = ((remaining as f64 * pd).ceil() as usize).clamp(1, remaining);
        schedule.push(PredictedStep {
            iteration: schedule.len(),
            remaining_before: remaining,
            pd,
            recovered,
        });
        remaining -= recovered;
    }
    Prediction { iterations: schedule.len(), schedule, converged: true }
}
