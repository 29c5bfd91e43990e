use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sft::GridSet;

/// `n_d`-out-of-`n_s` voting parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VotingConfig {
    pub n_s: usize,
    pub n_d: usize,
}

impl VotingConfig {
    /// No voting: a single sub-iteration whose decodes are all accepted.
    pub const NONE: Self = Self { n_s: 1, n_d: 1 };

    pub fn new(n_s: usize, n_d: usize) -> Result<Self> {
        if n_s == 0 || n_d == 0 || n_d > n_s {
            return Err(Error::InvalidParameter(format!("need 1 <= n_d <= n_s, got ({n_s}, {n_d})")));
        }
        Ok(Self { n_s, n_d })
    }
}

/// Keeps frequencies present in at least `n_d` of the candidate sets; each
/// survivor's amplitude is the mean over the sets containing it.
pub fn vote(candidate_sets: &[GridSet], n_d: usize) -> GridSet {
    let mut tally: BTreeMap<&Vec<usize>, (usize, Complex64)> = BTreeMap::new();
    for set in candidate_sets {
        for (freq, a) in set {
            let e = tally.entry(freq).or_insert((0, Complex64::new(0.0, 0.0)));
            e.0 += 1;
            e.1 += a;
        }
    }
    tally
        .into_iter()
        .filter(|(_, (count, _))| *count >= n_d)
        .map(|(freq, (count, sum))| (freq.clone(), sum / count as f64))
        .collect()
}
