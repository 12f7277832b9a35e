//! On-disk artifacts: CSV tables, JSON reports and run manifests.
//!
//! Every CSV file starts with a `schema_version` column and every JSON
//! document with a `schema_version` field. Files are written to a temporary
//! sibling and renamed into place, so a reader never sees a partial file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Profile, ScenarioConfig};
use crate::{HarnessError, Result};

pub const TRAINING_SCHEMA: &str = "slicer-train-v1";
pub const SWEEP_SCHEMA: &str = "slicer-sweep-v1";
pub const SHAPE_REPORT_SCHEMA: &str = "slicer-reward-shape-v1";
pub const COMPARISON_SCHEMA: &str = "slicer-compare-v1";
pub const COMPARISON_REPORT_SCHEMA: &str = "slicer-compare-report-v1";
pub const MATRIX_SCHEMA: &str = "slicer-matrix-v1";
pub const PERSONALIZATION_SCHEMA: &str = "slicer-personalization-v1";
pub const TRAINING_SUMMARY_SCHEMA: &str = "slicer-train-summary-v1";
pub const MANIFEST_SCHEMA: &str = "slicer-manifest-v1";

pub const CONFIG_FILE: &str = "config.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| HarnessError::io(path, std::io::Error::other("not a file path")))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::Csv(csv::Error::from(e.into_error())))
}

/// One training slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub schema_version: String,
    pub slot: u64,
    pub n_prbs: u32,
    pub arrivals: u32,
    pub completed: u32,
    pub satisfied: u32,
    pub p_sat: f64,
    pub mean_delay_ms: f64,
    pub std_delay_ms: f64,
    pub mean_snr_db: f64,
    pub reward: f64,
    pub epsilon: f64,
    pub d_max_ms: f64,
    pub seed: u64,
}

/// Exact column order of the training CSV.
pub const TRAINING_COLUMNS: [&str; 14] = [
    "schema_version",
    "slot",
    "n_prbs",
    "arrivals",
    "completed",
    "satisfied",
    "p_sat",
    "mean_delay_ms",
    "std_delay_ms",
    "mean_snr_db",
    "reward",
    "epsilon",
    "d_max_ms",
    "seed",
];

/// One grant of a PRB sweep. Delay is in milliseconds; both rewards are the
/// stationary values at the point's pooled statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub schema_version: String,
    pub n_prbs: u32,
    pub p_sat: f64,
    pub mean_delay: f64,
    pub lln_reward: f64,
    pub shaped_reward: f64,
}

/// One policy of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub schema_version: String,
    pub policy: String,
    pub mean_prbs: f64,
    pub p_sat: f64,
    pub mean_delay_ms: f64,
    pub std_delay_ms: f64,
    pub mean_reward: f64,
}

/// Square matrix as CSV: `schema_version, row, c0, c1, ...`.
pub fn matrix_csv_bytes<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Vec<u8>> {
    let rows: Vec<&[f64]> = rows.into_iter().collect();
    let n = rows.first().map_or(0, |r| r.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["schema_version".to_string(), "row".to_string()];
    header.extend((0..n).map(|j| format!("c{j}")));
    w.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        let mut rec = vec![MATRIX_SCHEMA.to_string(), i.to_string()];
        rec.extend(r.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::Csv(csv::Error::from(e.into_error())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    /// The run failed; the listed files are what was written before.
    Partial,
}

/// Record of one run, written last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: String,
    pub command: String,
    pub profile: Profile,
    /// SHA-256 of the stored `config.json`.
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    /// Artifacts in the run directory, in the order they were written.
    pub files: Vec<String>,
    /// First and last per-slot metrics files, when the run logs slots.
    pub metrics_start: Option<String>,
    pub metrics_end: Option<String>,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub status: RunStatus,
    pub error: Option<String>,
}

/// Hash of a config's canonical serialization.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    sha256_hex(cfg.to_canonical_json().as_bytes())
}

/// Read a run's manifest and check its hash against the stored config,
/// which must also still load.
pub fn verify_run_dir(dir: &Path) -> Result<RunManifest> {
    let mpath = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&mpath).map_err(|e| HarnessError::io(&mpath, e))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    let cpath = dir.join(CONFIG_FILE);
    let stored = fs::read(&cpath).map_err(|e| HarnessError::io(&cpath, e))?;
    let text = String::from_utf8(stored)
        .map_err(|_| HarnessError::Manifest("config.json is not UTF-8".into()))?;
    let cfg = crate::config::parse_config(&text, manifest.profile)?;
    if sha256_hex(text.as_bytes()) != manifest.config_hash
        || config_hash(&cfg) != manifest.config_hash
    {
        return Err(HarnessError::Manifest(format!(
            "config hash mismatch in {}",
            dir.display()
        )));
    }
    Ok(manifest)
}

/// Paths relative to a run directory.
pub fn relative(dir: &Path, path: &Path) -> String {
    path.strip_prefix(dir)
        .unwrap_or(path)
        .to_string_lossy()
        .into_owned()
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn training_header_is_exact() {
        let row = TrainingRow {
            schema_version: TRAINING_SCHEMA.into(),
            slot: 0,
            n_prbs: 1,
            arrivals: 2,
            completed: 3,
            satisfied: 1,
            p_sat: 0.5,
            mean_delay_ms: 1.0,
            std_delay_ms: 0.0,
            mean_snr_db: 30.0,
            reward: -1.0,
            epsilon: 0.1,
            d_max_ms: 5.0,
            seed: 9,
        };
        let bytes = csv_bytes(&[row]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRAINING_COLUMNS.join(","));
    }

    #[test]
    fn matrix_layout() {
        let rows = [vec![0.25, 0.75], vec![1.0, 0.0]];
        let text =
            String::from_utf8(matrix_csv_bytes(rows.iter().map(Vec::as_slice)).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "schema_version,row,c0,c1");
        assert_eq!(lines[1], format!("{MATRIX_SCHEMA},0,0.25,0.75"));
    }
}
