//! Personalized LLM inference: prompt rendering, backends and response parsing.

mod backend;
mod experiment;
mod parse;
mod prompt;

pub use backend::{
    gemini_request, gemini_text, prompt_hash, write_recordings, BackendConfig, BackendError,
    BackendKind, LiveBackend, LlmBackend, MockBackend, Recording, ReplayBackend,
};
pub use experiment::{
    build_prompt, read_predictions, run_experiment, write_predictions, ExperimentError,
    ExperimentOptions, ExperimentOutput, PredictionRow, PromptFile,
};
pub use parse::{
    parse_response, serialize, strip_fences, LlmPrediction, ParseError, PredictionEntry,
};
pub use prompt::{
    render_prompt, OneShotExample, PromptError, PromptMode, PromptSpec, WeekBlocks,
    FIRST_WEEK_LABEL, ONE_SHOT_TEMPLATE, SECOND_WEEK_LABEL, ZERO_SHOT_TEMPLATE,
};
