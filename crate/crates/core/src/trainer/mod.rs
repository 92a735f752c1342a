//! Training runs: the round loop, learning-curve metrics, checkpoints and
//! frozen-policy evaluation.

mod checkpoint;
mod config;
mod metrics;
mod run;
mod sink;

pub use checkpoint::{AgentSnapshot, DqnSnapshot, TrainCheckpoint, TrainCounters, CHECKPOINT_VERSION};
pub use config::{
    AgentKind, TrainConfig, DEFAULT_CHECKPOINT_PERIOD, DEFAULT_FLUSH_EVERY, DEFAULT_WINDOW,
};
pub use metrics::{metrics_writer, read_metrics, MetricAccumulator, MetricsRow, METRICS_COLUMNS};
pub use run::{build_agent, evaluate, evaluate_parallel, train, MemorySink, TrainSink, Trainer};
pub use sink::{FileSink, CHECKPOINT_DIR, FINAL_CHECKPOINT_FILE, METRICS_FILE, TRAJECTORIES_FILE};
