use serde::{Deserialize, Serialize};

use crate::recovery::{self, Detection, RecoveryConfig, RecoveryResult};
use crate::robust::vote::VotingConfig;
use crate::signal::SampleSource;
use crate::window::WindowSpec;

/// Settings for the exact-sparse transform.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FpsConfig {
    pub iterations: usize,
    /// Bins at or below `detection_eps · max|bin|` are treated as empty.
    pub detection_eps: f64,
    /// Two frequencies can share a bin on half of all slopes, so a streak of
    /// `k` empty iterations still hides them with probability about `2^-k`.
    pub stop_after_empty: usize,
    pub seed: u64,
}

impl Default for FpsConfig {
    fn default() -> Self {
        Self {
            iterations: 64,
            detection_eps: Detection::DEFAULT_RELATIVE,
            stop_after_empty: 10,
            seed: 0,
        }
    }
}

/// Exact-sparse recovery of on-grid frequencies: no window, no voting.
pub fn fps_sft(source: &SampleSource, cfg: &FpsConfig) -> RecoveryResult {
    let window = WindowSpec::rectangular(source.dims());
    recovery::run(
        source,
        &window,
        &RecoveryConfig {
            iterations: cfg.iterations,
            voting: VotingConfig::NONE,
            stop_after_empty: cfg.stop_after_empty,
            detection: Detection { relative: cfg.detection_eps, ..Detection::exact() },
            seed: cfg.seed,
        },
    )
}
