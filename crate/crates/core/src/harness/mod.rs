//! Experimental protocol: seeded tries, per-instance noise tuning, medians,
//! solved/trivial classification and CSV output.

mod clock;
mod experiment;
mod protocol;
mod report;

pub use clock::{thread_cpu_time, Budget, Clock};
pub use experiment::{
    median_step_ratio, run_experiment, ExperimentConfig, ExperimentOutput, GenerateConfig,
    StepRatio,
};
pub use protocol::{
    config_seed, filter_trivial, lower_median, optimize_noise, rank_candidates, run_try,
    summarize, tie_break_seed, Instance, InstanceSummary, NoiseSelection, Protocol, TryRecord,
    CENSORED_STEPS, DEFAULT_NOISES, DEFAULT_TRIES, DEFAULT_TRIVIAL_THRESHOLD,
};
pub use report::{emit_cactus_csv, emit_scatter_csv, emit_summaries_csv, emit_tries_csv};

use std::path::PathBuf;

use thiserror::Error;

use crate::io::AigerError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("summary sets cover different instances")]
    MismatchedInstanceSets,
    #[error("solver reported SAT on {instance} (seed {seed}, try {try_index}) but the witness does not verify")]
    UnverifiedWitness {
        instance: String,
        seed: u64,
        try_index: u64,
    },
    #[error("expected {expected} try records, found {found}")]
    IncompleteRecords { expected: usize, found: usize },
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Aiger { path: PathBuf, source: AigerError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
