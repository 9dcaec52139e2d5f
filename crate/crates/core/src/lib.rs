//! Smartphone-sensing loneliness toolkit.
//!
//! Raw sensor logs are ingested ([`ingest`]), turned into daily behavioral
//! features ([`features`]), assembled into 14-day windows ([`dataset`]) and fed
//! either to a random-forest/RFE model ([`forest`]) or to zero/one-shot LLM
//! prompts ([`llm`]). [`eval`] scores both against ULS-8 responses and
//! [`synth`] generates cohorts with planted behavior/loneliness couplings.

pub mod dataset;
pub mod eval;
pub mod features;
pub mod forest;
pub mod ingest;
pub mod llm;
pub mod model;
pub mod stats;
pub mod synth;
pub mod time;

pub use dataset::{build_windows, flatten, CoverageRule, FeatureWindow, FlatDataset, Target};
pub use eval::{compute_metrics, emit_report, render_report, Metric, MetricsReport, RfeSection};
pub use features::{extract_all, DailyFeatureRow, ExtractParams, FeatureCatalog, FeatureDef};
pub use forest::{run_rfe, train_forest, ForestConfig, RfeConfig, RfeTrace, TrainedForest};
pub use llm::{BackendConfig, BackendKind, LlmBackend, LlmPrediction, PromptMode};
pub use model::{
    item_text, score_total, AssessmentPoint, Payload, ScaleError, SensorEvent, SensorKind, Stage,
    Uls8Record, REVERSE_ITEMS,
};
pub use synth::{generate_cohort, planted_dataset, CohortSpec};
pub use time::Zone;
