//! Run manifests and the JSON evaluation report.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use oov_embed_core::{EvalReport, GmTrainConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Evaluation settings recorded in a manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub task: u8,
    pub k: usize,
    pub categories: Vec<String>,
    pub stopwords: String,
    pub label_similarity: String,
    pub model_kind: String,
}

/// Everything needed to rerun a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    /// Resolved training settings; absent when the command did not train.
    pub train: Option<TrainConfig>,
    pub gm: Option<GmTrainConfig>,
    pub eval: Option<EvalSettings>,
    pub corpus: Vec<PathBuf>,
    pub model_file: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Seconds since the Unix epoch. The only field that differs between
    /// otherwise identical runs.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            train: None,
            gm: None,
            eval: None,
            corpus: Vec::new(),
            model_file: None,
            dataset: None,
            seed: None,
            workers: None,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub report: EvalReport,
}

impl ReportFile {
    pub fn new(manifest: RunManifest, report: EvalReport) -> Self {
        ReportFile { schema_version: SCHEMA_VERSION, manifest, report }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: Value = serde_json::from_str(&text)?;
        validate_report(&value).map_err(Error::Config)?;
        Ok(serde_json::from_value(value)?)
    }
}

fn field<'a>(obj: &'a Value, key: &str, at: &str) -> Result<&'a Value, String> {
    obj.get(key).ok_or_else(|| format!("{at}: missing '{key}'"))
}

fn number(v: &Value, what: &str) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("{what} must be a number"))
}

fn count(v: &Value, what: &str) -> Result<u64, String> {
    v.as_u64().ok_or_else(|| format!("{what} must be a non-negative integer"))
}

/// Structural and consistency checks for a report document.
pub fn validate_report(doc: &Value) -> Result<(), String> {
    if doc.get("schema_version").and_then(Value::as_u64) != Some(SCHEMA_VERSION as u64) {
        return Err(format!("schema_version must be {SCHEMA_VERSION}"));
    }
    let manifest = field(doc, "manifest", "document")?;
    for key in ["subcommand", "version", "timestamp", "corpus", "train", "gm", "eval", "model_file", "dataset"] {
        field(manifest, key, "manifest")?;
    }
    if !manifest["subcommand"].is_string() {
        return Err("manifest.subcommand must be a string".into());
    }

    let report = field(doc, "report", "document")?;
    let task = count(field(report, "task", "report")?, "report.task")?;
    let n = count(field(report, "n", "report")?, "report.n")?;
    let rows = field(report, "rows", "report")?.as_array().ok_or("report.rows must be an array")?;
    if rows.len() as u64 != n {
        return Err(format!("report.n is {n} but there are {} rows", rows.len()));
    }
    let no_context = count(field(report, "no_context", "report")?, "report.no_context")?;
    let mut flagged = 0;
    for (i, row) in rows.iter().enumerate() {
        let at = format!("rows[{i}]");
        for key in ["word", "gold", "predictions", "rank", "hit", "no_context"] {
            field(row, key, &at)?;
        }
        if row["no_context"].as_bool().ok_or(format!("{at}.no_context must be a boolean"))? {
            flagged += 1;
        }
    }
    if flagged != no_context {
        return Err(format!("report.no_context is {no_context} but {flagged} rows are flagged"));
    }

    match task {
        1 => {
            let s1 = number(field(report, "s1", "report")?, "report.s1")?;
            let acc = number(field(report, "accuracy", "report")?, "report.accuracy")?;
            if n > 0 && s1 < 1.0 {
                return Err("report.s1 must be at least 1".into());
            }
            if !(0.0..=1.0).contains(&acc) {
                return Err("report.accuracy must lie in [0, 1]".into());
            }
            let mut sum = 0;
            for (i, row) in rows.iter().enumerate() {
                sum += count(&row["rank"], &format!("rows[{i}].rank"))?;
            }
            if n > 0 && (sum as f64 / n as f64 - s1).abs() > 1e-9 {
                return Err("report.s1 is not the mean row rank".into());
            }
        }
        2 => {
            let s2 = number(field(report, "s2", "report")?, "report.s2")?;
            let k = count(field(report, "k", "report")?, "report.k")?;
            if k == 0 {
                return Err("report.k must be positive".into());
            }
            let mut hits = 0;
            for (i, row) in rows.iter().enumerate() {
                if row["hit"].as_bool().ok_or(format!("rows[{i}].hit must be a boolean"))? {
                    hits += 1;
                }
            }
            if n > 0 && (hits as f64 / (k * n) as f64 - s2).abs() > 1e-9 {
                return Err("report.s2 does not match the row hits".into());
            }
        }
        t => return Err(format!("report.task must be 1 or 2, got {t}")),
    }
    Ok(())
}
