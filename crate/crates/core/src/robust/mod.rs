//! Noise-robust recovery: detection under noise, voting, and the
//! localization-probability bound.

pub mod bound;
pub mod detect;
pub mod rfps;
pub mod vote;

pub use bound::{pd_bound, predict_iterations, pw, p1, rayleigh_cdf, BoundParams, BoundRow, Prediction};
pub use detect::{detect_bins, line_noise_sigma, noise_detection};
pub use rfps::{rfps_sft, RfpsConfig};
pub use vote::{vote, VotingConfig};
