//! The iterative recovery loop shared by the exact and robust transforms.
//!
//! One iteration runs `n_s` sub-iterations. Each draws a random slope and
//! offset, reads `D + 1` windowed lines (base offset plus one unit shift per
//! dimension), removes everything recovered so far in the line-spectrum
//! domain, and decodes every bin above the detection threshold. Candidates
//! that survive `n_d`-out-of-`n_s` voting are merged into the running set.
//!
//! Decoded amplitudes are residuals (the running set was already
//! subtracted), so merging a frequency that is already present adds to its
//! amplitude. Entries whose amplitude falls to the detection floor are
//! dropped.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::robust::vote::{vote, VotingConfig};
use crate::rng;
use crate::sft::decode::decode_bin;
use crate::sft::line::{draw_line, extract_line, LineSpec};
use crate::sft::project::{GridSet, LineContext};
use crate::signal::{Dims, SampleSource};
use crate::window::WindowSpec;

const LINE_STREAM: u64 = 0x11E5;

/// Detection threshold for a line-spectrum bin: `max(floor, relative·max|raw|)`,
/// where `raw` is the base line spectrum before subtraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub floor: f64,
    pub relative: f64,
    /// Exact content only: a 1-sparse bin of an on-grid tone under a flat
    /// window has the same magnitude on the base and every shifted line, so
    /// a decode whose magnitudes differ by more than this fraction is a
    /// collision that happened to pass the consistency check.
    #[serde(default)]
    pub equal_magnitude: Option<f64>,
}

impl Detection {
    pub const DEFAULT_RELATIVE: f64 = 1e-9;
    pub const EQUAL_MAGNITUDE_TOLERANCE: f64 = 1e-6;

    pub fn exact() -> Self {
        Self { floor: 0.0, relative: Self::DEFAULT_RELATIVE, equal_magnitude: Some(Self::EQUAL_MAGNITUDE_TOLERANCE) }
    }

    fn magnitudes_agree(&self, base: Complex64, shifted: &[Vec<Complex64>], m: usize) -> bool {
        self.equal_magnitude
            .map_or(true, |tol| shifted.iter().all(|s| (s[m].norm() - base.norm()).abs() <= tol * base.norm()))
    }

    pub fn threshold(&self, max_raw: f64) -> f64 {
        self.floor.max(self.relative * max_raw)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryConfig {
    /// Maximum number of iterations `T`.
    pub iterations: usize,
    pub voting: VotingConfig,
    /// Stop after this many consecutive iterations accept nothing; 0 never stops early.
    pub stop_after_empty: usize,
    pub detection: Detection,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    /// Base lines of the sub-iterations.
    pub lines: Vec<LineSpec>,
    /// Bins decoded across all sub-iterations, before voting.
    pub candidates: usize,
    /// Frequencies that passed the vote.
    pub accepted: usize,
    /// Frequencies new to the running set.
    pub added: Vec<Vec<usize>>,
    pub updated: usize,
    pub removed: usize,
    /// Distinct samples read since the start of the run.
    pub samples_read: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub dims: Dims,
    #[serde(with = "grid_set_entries")]
    pub recovered: GridSet,
    pub iterations: Vec<IterationLog>,
    pub sub_iterations: usize,
    /// Distinct samples first read during the run.
    pub samples_read: usize,
}

impl RecoveryResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("recovery result serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Serializes a [`GridSet`] as a list of `{freq, re, im}` records.
pub mod grid_set_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        freq: Vec<usize>,
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(set: &GridSet, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = set
            .iter()
            .map(|(m, a)| Entry { freq: m.clone(), re: a.re, im: a.im })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GridSet, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| (e.freq, Complex64::new(e.re, e.im))).collect())
    }
}

/// Spectra of the `D + 1` offset lines with the running set removed.
pub(crate) struct LineSpectra {
    pub base: Vec<Complex64>,
    pub shifted: Vec<Vec<Complex64>>,
    /// Largest base-bin magnitude before subtraction.
    pub max_raw: f64,
}

pub(crate) fn line_spectra(
    source: &SampleSource,
    window: &WindowSpec,
    ctx: &LineContext,
    recovered: &GridSet,
    line: &LineSpec,
) -> LineSpectra {
    let dims = &ctx.dims;
    let spectrum = |l: &LineSpec| {
        let mut buf = extract_line(source, window, l);
        ctx.dft.forward_in_place(&mut buf);
        let max_raw = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
        ctx.accumulate(recovered, l, -1.0, &mut buf);
        (buf, max_raw)
    };
    let (base, max_raw) = spectrum(line);
    let shifted = (0..dims.rank()).map(|d| spectrum(&line.shifted(dims, d)).0).collect();
    LineSpectra { base, shifted, max_raw }
}

/// Decodes every bin above threshold. Returns the candidates and the raw peak.
pub(crate) fn decode_line(
    source: &SampleSource,
    window: &WindowSpec,
    ctx: &LineContext,
    recovered: &GridSet,
    line: &LineSpec,
    detection: &Detection,
) -> (GridSet, f64) {
    let spectra = line_spectra(source, window, ctx, recovered, line);
    let threshold = detection.threshold(spectra.max_raw);
    let mut out = GridSet::new();
    for m in 0..spectra.base.len() {
        if spectra.base[m].norm() <= threshold {
            continue;
        }
        if let Ok((freq, a)) = decode_bin(&spectra.base, &spectra.shifted, m, line, &ctx.dims, threshold) {
            if detection.magnitudes_agree(spectra.base[m], &spectra.shifted, m) {
                // A consistent decode maps to a unique bin, so keys never clash within a line.
                out.insert(freq, a);
            }
        }
    }
    (out, spectra.max_raw)
}

/// The line drawn for `(iteration, sub_iteration)` under `seed`.
pub fn line_for(dims: &Dims, seed: u64, iteration: usize, sub: usize) -> LineSpec {
    let mut r = rng::stream(&[seed, LINE_STREAM, iteration as u64, sub as u64]);
    draw_line(dims, &mut r)
}

/// Runs the recovery loop on `source` with `window` applied to every sample read.
pub fn run(source: &SampleSource, window: &WindowSpec, cfg: &RecoveryConfig) -> RecoveryResult {
    let dims = source.dims().clone();
    let ctx = LineContext::new(&dims);
    let reads_at_start = source.distinct_reads();
    let mut recovered = GridSet::new();
    let mut logs = Vec::new();
    let mut max_raw_seen: f64 = 0.0;
    let mut empty_streak = 0;
    let mut sub_iterations = 0;

    for it in 0..cfg.iterations {
        let mut log = IterationLog { iteration: it, ..Default::default() };
        let mut candidate_sets = Vec::with_capacity(cfg.voting.n_s);
        for sub in 0..cfg.voting.n_s {
            let line = line_for(&dims, cfg.seed, it, sub);
            let (cands, max_raw) = decode_line(source, window, &ctx, &recovered, &line, &cfg.detection);
            max_raw_seen = max_raw_seen.max(max_raw);
            log.candidates += cands.len();
            log.lines.push(line);
            candidate_sets.push(cands);
            sub_iterations += 1;
        }
        let survivors = vote(&candidate_sets, cfg.voting.n_d);
        log.accepted = survivors.len();

        let floor = cfg.detection.threshold(max_raw_seen);
        for (freq, a) in survivors {
            match recovered.get_mut(&freq) {
                Some(existing) => {
                    *existing += a;
                    if existing.norm() <= floor {
                        recovered.remove(&freq);
                        log.removed += 1;
                    } else {
                        log.updated += 1;
                    }
                }
                None => {
                    recovered.insert(freq.clone(), a);
                    log.added.push(freq);
                }
            }
        }
        log.samples_read = source.distinct_reads() - reads_at_start;
        let empty = log.accepted == 0;
        logs.push(log);

        if empty {
            empty_streak += 1;
            if cfg.stop_after_empty > 0 && empty_streak >= cfg.stop_after_empty {
                break;
            }
        } else {
            empty_streak = 0;
        }
    }

    RecoveryResult {
        dims,
        recovered,
        iterations: logs,
        sub_iterations,
        samples_read: source.distinct_reads() - reads_at_start,
    }
}
