//! Experiment harness for the `stopbandit-core` learners: instance files,
//! regret traces, horizon sweeps and the adversarial demonstrations.

pub mod adversarial;
pub mod experiment;
pub mod instance;
pub mod sweep;
pub mod trace;

pub use experiment::{run, run_experiment, Experiment, ExperimentConfig, InstanceSource, Policy, Problem, Snapshot};
pub use sweep::{fit_exponent, sweep_and_fit, Fit, SweepResult, SweepRow};
pub use trace::{read_csv, CsvRow, Recorder, RegretTrace};


#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] stopbandit_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
