use log::warn;
use serde::{Deserialize, Serialize};

use super::detect::noise_detection;
use super::vote::VotingConfig;
use crate::error::{Error, Result};
use crate::recovery::{self, RecoveryConfig, RecoveryResult};
use crate::sft::lcm_length;
use crate::signal::SampleSource;
use crate::window::{min_psr, WindowSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RfpsConfig {
    pub iterations: usize,
    pub voting: VotingConfig,
    /// Detection threshold in units of the per-bin noise standard deviation.
    pub kappa: f64,
    pub stop_after_empty: usize,
    pub seed: u64,
}

impl Default for RfpsConfig {
    fn default() -> Self {
        Self {
            iterations: 30,
            voting: VotingConfig { n_s: 3, n_d: 2 },
            kappa: 5.0,
            stop_after_empty: 3,
            seed: 0,
        }
    }
}

/// Robust recovery: windowed lines, noise-scaled detection and voting.
///
/// Uses the scene's noise level for the detection threshold. Logs a warning
/// when the window PSR does not clear the design rule for the scene's
/// strongest sinusoid.
pub fn rfps_sft(source: &SampleSource, window: &WindowSpec, cfg: &RfpsConfig) -> Result<RecoveryResult> {
    let dims = source.dims();
    if window.lengths() != dims.as_slice() {
        return Err(Error::InvalidParameter(format!(
            "window lengths {:?} do not match dims {dims}",
            window.lengths()
        )));
    }
    VotingConfig::new(cfg.voting.n_s, cfg.voting.n_d)?;
    let scene = source.scene();
    let snr = scene.snr_max_db();
    if snr.is_finite() && scene.k() > 0 {
        let needed = min_psr(snr, window);
        if window.psr_db <= needed {
            warn!(
                "window PSR {:.1} dB is below the {:.1} dB required at SNR_max {:.1} dB; expect leakage",
                window.psr_db, needed, snr
            );
        }
    }
    let detection = noise_detection(scene.noise_sigma, window, lcm_length(dims), cfg.kappa);
    Ok(recovery::run(
        source,
        window,
        &RecoveryConfig {
            iterations: cfg.iterations,
            voting: cfg.voting,
            stop_after_empty: cfg.stop_after_empty,
            detection,
            seed: cfg.seed,
        },
    ))
}
