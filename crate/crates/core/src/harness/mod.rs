//! Experiment configuration, cross-validation and reporting.

mod config;
mod crossval;
mod output;
mod report;

pub use config::ExperimentConfig;
pub use crossval::{
    assign_folds, rouge_pair, run_crossval, run_crossval_with_base, split_folds, summarize_cluster,
    train_base, BaseModel, ClusterReferences, CrossvalOutput,
};
pub use output::{model_file_name, write_crossval};
pub use report::{
    sha256_file, sha256_hex, Checksum, ClassifierSummary, ClusterScore, EvalReport, FoldReport,
    ForcedCluster, ForcedReport, Manifest, ModeResult, ModeSummary, StyleReport,
    REPORT_SCHEMA_VERSION,
};
