//! Declarative experiments: configuration, sub-run planning, classifier
//! evaluation, and CSV/TOML result emission.

mod config;
mod output;
mod run;

pub use config::{
    default_angles, AblationTask, ExperimentConfig, ExperimentKind, Overrides, TaskParams, TopologySpec,
    TrainingSection,
};
pub use output::{
    emit_outputs, output_dir, render_tables, replay, Manifest, Table, ARTIFACT_NAME, ARTIFACT_VERSION, MANIFEST_FILE,
};
pub use run::{
    evaluate_classifier, plan_runs, run_experiment, run_experiment_with_progress, run_plan, AggregateRow,
    ClassifierReport, ConfusionMatrix, ExperimentResults, StateReport, SubRunPlan, SubRunResult, TestSet,
};
