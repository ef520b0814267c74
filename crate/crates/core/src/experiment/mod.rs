//! Experiment driver: configuration profiles, data generation, training,
//! prediction, quantum verification and metric reports.

mod config;
mod quantum;
mod report;
mod run;

pub use config::{
    DtName, DtRule, ExperimentConfig, Mode, OutputConfig, PredictionConfig, QuantumConfig, SystemConfig,
    TrainingConfig, CI_OVERRIDES, PAPER_PROFILE,
};
pub use quantum::{
    cmd_verify_quantum, toy_instance, verify_quantum, AncillaReport, PredictionCheck, StageReport, ToyInstance,
    VerificationReport, PROBABILITY_TOL, VERIFY_FILE,
};
pub use report::{build_report, cmd_report, summarize, ComparisonRow, MetricSummary, Report};
pub use run::{
    cmd_generate, cmd_predict, cmd_train, generate, metric_row, output_dir, predict, read_metrics, system, train,
    write_metrics, Dataset, MetricRow, METRICS_FILE, MODEL_FILE, PREDICTED_FILE, PREDICT_FILE, RESOLVED_CONFIG_FILE,
    TARGETS_FILE, TRAIN_FILE, TRAIN_TARGETS_FILE,
};
