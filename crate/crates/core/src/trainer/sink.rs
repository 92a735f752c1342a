use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::checkpoint::TrainCheckpoint;
use super::metrics::{metrics_writer, MetricsRow};
use super::run::TrainSink;
use crate::error::{Error, Result};
use crate::mdp_env::{write_trajectory, ActionSet, Episode};

pub const METRICS_FILE: &str = "metrics.csv";
pub const TRAJECTORIES_FILE: &str = "trajectories.jsonl";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const FINAL_CHECKPOINT_FILE: &str = "checkpoint.json";

/// Writes `metrics.csv`, `trajectories.jsonl` and checkpoints under a run directory.
/// Buffers are flushed every `flush_every` rounds and before every checkpoint.
pub struct FileSink {
    dir: PathBuf,
    metrics: csv::Writer<BufWriter<File>>,
    trajectories: BufWriter<File>,
    flush_every: u64,
    since_flush: u64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

impl FileSink {
    pub fn create(dir: &Path, flush_every: u64) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        Ok(FileSink {
            dir: dir.to_path_buf(),
            metrics: metrics_writer(create(&dir.join(METRICS_FILE))?),
            trajectories: create(&dir.join(TRAJECTORIES_FILE))?,
            flush_every: flush_every.max(1),
            since_flush: 0,
        })
    }

    pub fn checkpoint_path(dir: &Path, round: u64) -> PathBuf {
        dir.join(CHECKPOINT_DIR).join(format!("round_{round:08}.json"))
    }

    fn write_checkpoint(path: &Path, checkpoint: &TrainCheckpoint) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
        let mut w = create(path)?;
        checkpoint.to_json_writer(&mut w)?;
        w.flush().map_err(|e| Error::io(path.display().to_string(), e))
    }
}

impl TrainSink for FileSink {
    fn record(&mut self, row: &MetricsRow, episode: &Episode, actions: &ActionSet) -> Result<()> {
        self.metrics.serialize(row)?;
        write_trajectory(&mut self.trajectories, row.round, &episode.transitions, actions)?;
        self.since_flush += 1;
        if self.since_flush >= self.flush_every {
            self.flush()?;
        }
        Ok(())
    }

    fn checkpoint(&mut self, checkpoint: &TrainCheckpoint, is_final: bool) -> Result<()> {
        let path = if is_final {
            self.dir.join(FINAL_CHECKPOINT_FILE)
        } else {
            FileSink::checkpoint_path(&self.dir, checkpoint.next_round)
        };
        FileSink::write_checkpoint(&path, checkpoint)
    }

    fn flush(&mut self) -> Result<()> {
        self.since_flush = 0;
        let label = |f: &str| self.dir.join(f).display().to_string();
        self.metrics
            .flush()
            .map_err(|e| Error::io(label(METRICS_FILE), e))?;
        self.trajectories
            .flush()
            .map_err(|e| Error::io(label(TRAJECTORIES_FILE), e))
    }
}
