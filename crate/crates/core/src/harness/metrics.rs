//! Metrics CSV files, one per (experiment, seed). Wall-clock times go to a sidecar
//! `.timing.csv` so the metrics file itself is reproducible byte for byte.

use std::cell::RefCell;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tasklang::RewardMode;
use crate::trainer::MetricsRow;

/// One line of a metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub experiment: String,
    pub method: String,
    pub task: String,
    /// `goal` or `survival`.
    pub reward_mode: String,
    pub seed: u64,
    pub steps: u64,
    pub mean_return: f64,
    pub mean_length: f64,
    pub success_rate: f64,
    pub entropy: f64,
    pub config_hash: String,
}

#[derive(Debug, Serialize)]
struct TimingRecord<'a> {
    steps: u64,
    task: &'a str,
    wall_clock_secs: f64,
}

pub fn reward_mode_label(mode: RewardMode) -> &'static str {
    match mode {
        RewardMode::Goal => "goal",
        RewardMode::Survival => "survival",
    }
}

/// `<dir>/<experiment>.seed<seed>.csv`
pub fn metrics_path(dir: &Path, experiment: &str, seed: u64) -> PathBuf {
    dir.join(format!("{experiment}.seed{seed}.csv"))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

/// Appends rows as training produces them; each row is flushed immediately.
pub struct MetricsWriter {
    path: PathBuf,
    inner: RefCell<Inner>,
    experiment: String,
    method: String,
    config_hash: String,
}

struct Inner {
    metrics: csv::Writer<File>,
    timing: csv::Writer<File>,
    /// Reward mode per task key.
    modes: Vec<(String, RewardMode)>,
    error: Option<Error>,
}

impl MetricsWriter {
    pub fn create(
        path: &Path,
        experiment: &str,
        method: &str,
        config_hash: &str,
        modes: Vec<(String, RewardMode)>,
    ) -> Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let metrics = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let tpath = path.with_extension("timing.csv");
        let timing = csv::Writer::from_path(&tpath).map_err(|e| csv_err(&tpath, e))?;
        Ok(MetricsWriter {
            path: path.to_path_buf(),
            inner: RefCell::new(Inner {
                metrics,
                timing,
                modes,
                error: None,
            }),
            experiment: experiment.into(),
            method: method.into(),
            config_hash: config_hash.into(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn write(&self, row: &MetricsRow) -> Result<()> {
        let mut inner = self.inner.borrow_mut();
        let mode = inner
            .modes
            .iter()
            .find(|(k, _)| *k == row.task)
            .map(|(_, m)| *m)
            .unwrap_or(RewardMode::Goal);
        let rec = MetricsRecord {
            experiment: self.experiment.clone(),
            method: self.method.clone(),
            task: row.task.clone(),
            reward_mode: reward_mode_label(mode).into(),
            seed: row.seed,
            steps: row.steps,
            mean_return: row.mean_return,
            mean_length: row.mean_length,
            success_rate: row.success_rate,
            entropy: row.entropy,
            config_hash: self.config_hash.clone(),
        };
        let path = self.path.clone();
        inner
            .metrics
            .serialize(&rec)
            .map_err(|e| csv_err(&path, e))?;
        inner.metrics.flush().map_err(|e| Error::io(&path, e))?;
        let t = TimingRecord {
            steps: row.steps,
            task: &row.task,
            wall_clock_secs: row.wall_clock_secs,
        };
        inner.timing.serialize(t).map_err(|e| csv_err(&path, e))?;
        inner.timing.flush().map_err(|e| Error::io(&path, e))
    }

    /// Progress callback for the trainer. The first write error is kept and reported
    /// by [`finish`](Self::finish).
    pub fn record(&self, row: &MetricsRow) {
        if let Err(e) = self.write(row) {
            self.inner.borrow_mut().error.get_or_insert(e);
        }
    }

    pub fn finish(self) -> Result<PathBuf> {
        match self.inner.into_inner().error {
            Some(e) => Err(e),
            None => Ok(self.path),
        }
    }
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = match csv::Reader::from_path(path) {
        Ok(r) => r,
        Err(e) => {
            return Err(match e.kind() {
                csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                    Error::MissingPrerequisite(format!("metrics file {} not found", path.display()))
                }
                _ => csv_err(path, e),
            })
        }
    };
    r.deserialize()
        .map(|rec| rec.map_err(|e| csv_err(path, e)))
        .collect()
}
