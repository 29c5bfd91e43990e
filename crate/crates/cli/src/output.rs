use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;

use crate::experiments::Report;

/// Stable identifier of a configuration: a hash of its canonical TOML.
pub fn run_id(report: &Report) -> String {
    let text = report.config.to_toml();
    let words: Vec<u64> = text
        .as_bytes()
        .chunks(8)
        .map(|c| c.iter().fold(0u64, |acc, &b| acc << 8 | b as u64))
        .collect();
    format!("{:016x}", rfps_core::rng::hash_key(&words))
}

/// Writes `<id>-<run>.csv` (one row per trial record) and `<id>-<run>.json`
/// (config, summary and checks). Returns both paths.
pub fn write_report(report: &Report, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let stem = format!("{}-{}", report.config.id, run_id(report));
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let json_path = out_dir.join(format!("{stem}.json"));
    std::fs::write(&csv_path, &report.csv)?;
    let doc = json!({
        "config": report.config,
        "summary": report.summary,
        "checks": report.checks,
        "passed": report.passed(),
    });
    std::fs::write(&json_path, serde_json::to_string_pretty(&doc)?)?;
    Ok((csv_path, json_path))
}
