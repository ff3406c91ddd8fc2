//! On-disk results: `traces.csv` (`rep,t,cum_regret`), `summary.csv`
//! (`T,checkpoint,mean,std,n`) and a `run.toml` sidecar holding the full
//! configuration, every replication seed and the crate version.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::episode::RegretTrace;
use super::Summary;
use crate::error::{Error, Result};

pub const TRACES_FILE: &str = "traces.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SIDECAR_FILE: &str = "run.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub rep: usize,
    pub t: usize,
    pub cum_regret: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub checkpoint: usize,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Reproducibility record written next to the CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub version: String,
    /// Replication seeds in decimal, since TOML integers are signed.
    pub seeds: Vec<String>,
    /// Derived constants such as the two-point gap.
    #[serde(default)]
    pub derived: BTreeMap<String, f64>,
    pub config: ExperimentConfig,
}

impl Sidecar {
    pub fn new(config: &ExperimentConfig, traces: &[RegretTrace]) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: traces.iter().map(|t| t.seed.to_string()).collect(),
            derived: BTreeMap::new(),
            config: config.clone(),
        }
    }
}

pub fn summary_rows(summaries: &[Summary]) -> Vec<SummaryRow> {
    summaries
        .iter()
        .flat_map(|s| {
            s.checkpoints.iter().map(move |c| SummaryRow {
                horizon: s.horizon,
                checkpoint: c.t,
                mean: c.mean,
                std: c.std,
                n: c.n,
            })
        })
        .collect()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse { path: path.to_path_buf(), message: format!("{other:?}") },
    }
}

pub fn write_traces(path: &Path, traces: &[RegretTrace]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["rep", "t", "cum_regret"]).map_err(|e| csv_error(path, e))?;
    for trace in traces {
        for c in &trace.checkpoints {
            w.serialize(TraceRow { rep: trace.replication, t: c.t, cum_regret: c.cum_regret })
                .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["T", "checkpoint", "mean", "std", "n"]).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    let text = toml::to_string(sidecar).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the three result files into `dir`, creating it if needed.
/// Returns the paths written.
pub fn write_results(dir: &Path, traces: &[RegretTrace], summary: &Summary, sidecar: &Sidecar) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = [dir.join(TRACES_FILE), dir.join(SUMMARY_FILE), dir.join(SIDECAR_FILE)];
    write_traces(&paths[0], traces)?;
    write_summary(&paths[1], &summary_rows(std::slice::from_ref(summary)))?;
    write_sidecar(&paths[2], sidecar)?;
    Ok(paths.to_vec())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

pub fn read_traces(path: &Path) -> Result<Vec<TraceRow>> {
    read_rows(path)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
}
