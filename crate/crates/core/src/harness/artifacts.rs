//! On-disk results: `episodes.jsonl`, `summary.csv`, `config.snapshot`,
//! `metadata.json` (the only file holding a timestamp) and `policies/`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::harness::experiment::{EpisodeRecord, ExperimentResult, HarnessError, SUMMARY_COLUMNS};

pub const EPISODES_FILE: &str = "episodes.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SNAPSHOT_FILE: &str = "config.snapshot";
pub const METADATA_FILE: &str = "metadata.json";
pub const POLICY_DIR: &str = "policies";

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |error| HarnessError::Io { path: path.display().to_string(), error }
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(contents.as_bytes()).map_err(io_err(path))
}

pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut out = SUMMARY_COLUMNS.join(",");
    out.push('\n');
    for s in &result.seeds {
        out.push_str(&s.summary.csv_row());
        out.push('\n');
    }
    out.push_str(&result.aggregate.csv_row());
    out.push('\n');
    out
}

pub fn episodes_jsonl(result: &ExperimentResult) -> String {
    let mut out = String::new();
    for r in result.seeds.iter().flat_map(|s| &s.records) {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Writes every artifact into `dir`, creating it if needed.
pub fn write_artifacts(result: &ExperimentResult, dir: &Path) -> Result<(), HarnessError> {
    let policies = dir.join(POLICY_DIR);
    fs::create_dir_all(&policies).map_err(io_err(&policies))?;
    write_file(&dir.join(EPISODES_FILE), &episodes_jsonl(result))?;
    write_file(&dir.join(SUMMARY_FILE), &summary_csv(result))?;
    write_file(&dir.join(SNAPSHOT_FILE), &result.config.to_toml())?;
    for s in &result.seeds {
        write_file(&policies.join(format!("seed-{}.json", s.seed)), &s.policy)?;
    }
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = serde_json::json!({
        "created_unix": created,
        "version": env!("CARGO_PKG_VERSION"),
        "seeds": result.seeds.len(),
    });
    write_file(&dir.join(METADATA_FILE), &format!("{meta}\n"))
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

fn corrupt(path: &Path, message: impl Into<String>) -> ReadError {
    ReadError::Corrupt { path: path.to_path_buf(), message: message.into() }
}

/// Reads and checks every line of an `episodes.jsonl`.
pub fn read_episodes(path: &Path) -> Result<Vec<EpisodeRecord>, ReadError> {
    let text = fs::read_to_string(path).map_err(|e| corrupt(path, e.to_string()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| corrupt(path, format!("line {}: {e}", i + 1))))
        .collect()
}

/// Reads `summary.csv` into one column map per row.
pub fn read_summary(path: &Path) -> Result<Vec<BTreeMap<String, String>>, ReadError> {
    let text = fs::read_to_string(path).map_err(|e| corrupt(path, e.to_string()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| corrupt(path, "empty file"))?.split(',').collect();
    if header != SUMMARY_COLUMNS {
        return Err(corrupt(path, "unexpected header"));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let cells: Vec<&str> = l.split(',').collect();
            if cells.len() != header.len() {
                return Err(corrupt(path, format!("line {}: expected {} cells", i + 2, header.len())));
            }
            Ok(header.iter().zip(cells).map(|(h, c)| (h.to_string(), c.to_string())).collect())
        })
        .collect()
}
