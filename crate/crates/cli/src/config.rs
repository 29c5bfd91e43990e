use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rfps_core::radar::{RadarScene, TargetSpec};
use rfps_core::robust::bound::SIGMA_P_DEFAULT;
use rfps_core::robust::VotingConfig;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    PsrSweep,
    WindowCompare,
    VotingCompare,
    IterationBound,
    RadarRecon,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 5] = [
        ExperimentId::PsrSweep,
        ExperimentId::WindowCompare,
        ExperimentId::VotingCompare,
        ExperimentId::IterationBound,
        ExperimentId::RadarRecon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::PsrSweep => "psr-sweep",
            ExperimentId::WindowCompare => "window-compare",
            ExperimentId::VotingCompare => "voting-compare",
            ExperimentId::IterationBound => "iteration-bound",
            ExperimentId::RadarRecon => "radar-recon",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .with_context(|| format!("unknown experiment '{s}'"))
    }
}

/// Everything an experiment run depends on. Unset fields take the
/// experiment's defaults (see [`ExperimentConfig::defaults`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub dims: Vec<usize>,
    /// Sinusoids per scene; for `iteration-bound` the sparsities are in `sparsity`.
    pub k: usize,
    pub noise_sigma: f64,
    /// Minimum spacing between random off-grid tones, bins.
    pub min_separation_bins: f64,
    /// SNR of every sinusoid, dB; swept where an experiment sweeps SNR.
    pub snr_db: Vec<f64>,
    /// Chebyshev PSR values, dB; `psr-sweep` sweeps them, `window-compare` compares them.
    pub psr_db: Vec<f64>,
    /// Voting configurations as `[n_s, n_d]` pairs.
    pub voting: Vec<[usize; 2]>,
    pub iterations: usize,
    pub kappa: f64,
    pub stop_after_empty: usize,
    /// `iteration-bound` only: sizes of `S'`.
    pub sparsity: Vec<usize>,
    pub sigma_p: f64,
    /// `iteration-bound` only: draw scenes without pairs of tones that share a
    /// line bin under every admissible slope.
    pub resolvable_only: bool,
    /// `psr-sweep` only: expected argmax PSR per SNR, `[snr_db, psr_db]`.
    pub expect_argmax: Vec<[f64; 2]>,
    pub argmax_tolerance_db: f64,
    /// `radar-recon` only.
    pub radar: Option<RadarScene>,
}

impl ExperimentConfig {
    pub fn defaults(id: ExperimentId) -> Self {
        let base = Self {
            id,
            trials: 30,
            seed: 1,
            threads: 0,
            dims: vec![256, 256],
            k: 10,
            noise_sigma: 1.0,
            min_separation_bins: 12.0,
            snr_db: vec![30.0],
            psr_db: vec![70.0],
            voting: vec![[3, 2]],
            iterations: 30,
            kappa: 5.0,
            stop_after_empty: 3,
            sparsity: vec![],
            sigma_p: SIGMA_P_DEFAULT,
            resolvable_only: true,
            expect_argmax: vec![],
            argmax_tolerance_db: 5.0,
            radar: None,
        };
        match id {
            ExperimentId::PsrSweep => Self {
                snr_db: vec![20.0, 30.0],
                psr_db: (0..10).map(|i| 45.0 + 5.0 * i as f64).collect(),
                iterations: 1,
                expect_argmax: vec![[20.0, 60.0], [30.0, 70.0]],
                ..base
            },
            ExperimentId::WindowCompare => Self { trials: 20, psr_db: vec![45.0, 70.0], ..base },
            ExperimentId::VotingCompare => Self { trials: 20, voting: vec![[1, 1], [3, 1], [3, 2]], ..base },
            ExperimentId::IterationBound => Self {
                trials: 10,
                snr_db: vec![20.0, 30.0],
                sparsity: vec![250, 1000],
                iterations: 400,
                stop_after_empty: 10,
                ..base
            },
            ExperimentId::RadarRecon => Self {
                trials: 1,
                dims: vec![512, 256, 16],
                k: 3,
                psr_db: vec![60.0],
                iterations: 10,
                radar: Some(default_radar_scene()),
                ..base
            },
        }
    }

    /// Parses a TOML document; keys it omits keep the defaults of its `id`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let overrides: toml::Table = text.parse().context("config is not valid TOML")?;
        let id: ExperimentId = overrides
            .get("id")
            .and_then(|v| v.as_str())
            .context("config needs an `id`")?
            .parse()?;
        let mut table = match toml::Value::try_from(Self::defaults(id))? {
            toml::Value::Table(t) => t,
            _ => unreachable!("config serializes to a table"),
        };
        table.extend(overrides);
        let cfg: Self = toml::Value::Table(table).try_into().context("invalid experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        rfps_core::Dims::new(self.dims.clone())?;
        self.votings()?;
        if self.noise_sigma < 0.0 || self.kappa <= 0.0 {
            bail!("noise_sigma must be >= 0 and kappa > 0");
        }
        Ok(())
    }

    pub fn votings(&self) -> Result<Vec<VotingConfig>> {
        self.voting
            .iter()
            .map(|&[n_s, n_d]| VotingConfig::new(n_s, n_d).map_err(Into::into))
            .collect()
    }
}

/// Three well-separated targets at 30 dB SNR.
pub fn default_radar_scene() -> RadarScene {
    let target = |range, doppler, azimuth_deg| TargetSpec { range, doppler, azimuth_deg, snr_db: 30.0 };
    RadarScene {
        params: Default::default(),
        targets: vec![target(42.3, 812.0, -21.7), target(131.9, -2210.5, 8.4), target(247.6, 3125.0, 37.2)],
        noise_sigma: 1.0,
        seed: 1,
    }
}
