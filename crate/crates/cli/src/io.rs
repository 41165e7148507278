use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wirl_core::{parse_dataset, validate_dataset, Dataset, LearnerConfig, ParamVector, TraceRow};

use crate::exit::validation;

pub const TRACE_HEADER: [&str; 6] = ["k", "alpha", "F", "F_best", "subgrad_norm", "bound"];

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A validated dataset with the hash of its file contents.
pub struct LoadedDataset {
    pub data: Dataset,
    pub sha256: String,
}

pub fn load_dataset(path: &Path) -> Result<LoadedDataset> {
    let bytes = fs::read(path).with_context(|| format!("cannot read dataset {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| validation(format!("{} is not UTF-8 text", path.display())))?;
    let data = parse_dataset(text).with_context(|| format!("invalid dataset {}", path.display()))?;
    let data = validate_dataset(data).with_context(|| format!("invalid dataset {}", path.display()))?;
    for &i in &data.metadata.unverified_samples {
        eprintln!("warning: sample {i} has too many knapsack items to verify its expert action");
    }
    Ok(LoadedDataset {
        data,
        sha256: sha256_hex(&bytes),
    })
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn trace_csv(rows: &[TraceRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt_float(r.alpha),
            fmt_float(r.objective),
            fmt_float(r.best_objective),
            fmt_float(r.subgrad_norm),
            r.bound.map(fmt_float).unwrap_or_default(),
        ])?;
    }
    Ok(w.into_inner()?)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| {
        validation(format!(
            "trace line {line}: cannot parse {} value {raw:?}",
            TRACE_HEADER[i]
        ))
    })
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read trace {}", path.display()))?;
    let header = r.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(validation(format!(
            "{}: trace header {:?} does not match {}",
            path.display(),
            header.iter().collect::<Vec<_>>(),
            TRACE_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| validation(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bound = match rec.get(5).unwrap_or("") {
            "" => None,
            _ => Some(field(&rec, 5, line)?),
        };
        rows.push(TraceRow {
            k: field(&rec, 0, line)?,
            alpha: field(&rec, 1, line)?,
            objective: field(&rec, 2, line)?,
            best_objective: field(&rec, 3, line)?,
            subgrad_norm: field(&rec, 4, line)?,
            bound,
        });
    }
    Ok(rows)
}

/// JSON summary written next to a learning trace. Wall time is left out so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub phi_best: ParamVector,
    pub k_best: usize,
    #[serde(rename = "F_best")]
    pub f_best: f64,
    pub iterations: usize,
    pub converged: bool,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abort_reason: Option<String>,
    #[serde(rename = "G")]
    pub lipschitz: f64,
    #[serde(rename = "G_exact")]
    pub lipschitz_exact: bool,
    pub diameter: f64,
    pub dataset_sha256: String,
    pub config: LearnerConfig,
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read summary {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| validation(format!("{}: malformed summary: {e}", path.display())))
}

/// Inline JSON, or `@path` to read it from a file.
pub fn json_arg<T: serde::de::DeserializeOwned>(flag: &str, value: &str) -> Result<T> {
    let text = match value.strip_prefix('@') {
        Some(p) => fs::read_to_string(p).with_context(|| format!("cannot read {flag} file {p}"))?,
        None => value.to_owned(),
    };
    serde_json::from_str(&text).map_err(|e| crate::exit::usage(format!("--{flag}: {e}")))
}
