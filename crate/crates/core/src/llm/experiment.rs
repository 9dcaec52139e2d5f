//! Per-sensor prompting over a set of windows.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::backend::{prompt_hash, BackendError, LlmBackend};
use super::parse::{parse_response, LlmPrediction, PredictionEntry};
use super::prompt::{
    render_prompt, OneShotExample, PromptError, PromptMode, PromptSpec, WeekBlocks,
};
use crate::dataset::FeatureWindow;
use crate::features::FeatureCatalog;
use crate::model::{SensorKind, Stage};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("backend failed for {participant}/{sensor} after {attempts} attempts: {source}")]
    Backend {
        participant: String,
        sensor: SensorKind,
        attempts: usize,
        source: BackendError,
    },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub mode: PromptMode,
    pub sensors: Vec<SensorKind>,
    pub target_stage: Stage,
    pub example_stage: Stage,
    pub max_retries: usize,
    pub max_in_flight: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            mode: PromptMode::ZeroShot,
            sensors: SensorKind::ALL.to_vec(),
            target_stage: Stage::EndOfSemester,
            example_stage: Stage::Midterm,
            max_retries: 2,
            max_in_flight: 4,
        }
    }
}

/// One line of the predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub participant: String,
    pub stage: Stage,
    pub sensor: SensorKind,
    pub mode: PromptMode,
    pub prompt_hash: String,
    pub raw_hash: String,
    pub valid: bool,
    /// Parse error code of the final attempt.
    pub error: Option<String>,
    pub attempts: usize,
    pub entries: Vec<PredictionEntry>,
}

impl PredictionRow {
    pub fn prediction(&self) -> Option<LlmPrediction> {
        if !self.valid {
            return None;
        }
        LlmPrediction::from_entries(self.entries.clone()).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptFile {
    /// `<stage>/<sensor>/<participant>.txt`
    pub rel_path: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<PredictionRow>,
    pub prompts: Vec<PromptFile>,
    /// Final raw response per prompt hash; feeds the replay backend.
    pub recordings: BTreeMap<String, String>,
    /// Participants without an example window (one-shot only).
    pub skipped: Vec<String>,
}

impl ExperimentOutput {
    pub fn invalid_count(&self) -> usize {
        self.rows.iter().filter(|r| !r.valid).count()
    }
}

struct Job<'a> {
    window: &'a FeatureWindow,
    example: Option<&'a FeatureWindow>,
    sensor: SensorKind,
}

pub fn build_prompt(
    window: &FeatureWindow,
    example: Option<&FeatureWindow>,
    catalog: &FeatureCatalog,
    sensor: SensorKind,
    mode: PromptMode,
) -> Result<String, PromptError> {
    let spec = PromptSpec {
        mode,
        sensor,
        subject: WeekBlocks::from_window(window, catalog, sensor),
        example: example.map(|ex| OneShotExample {
            blocks: WeekBlocks::from_window(ex, catalog, sensor),
            record: ex.record,
        }),
    };
    render_prompt(&spec)
}

pub fn run_experiment(
    windows: &[FeatureWindow],
    catalog: &FeatureCatalog,
    opts: &ExperimentOptions,
    backend: &dyn LlmBackend,
) -> Result<ExperimentOutput, ExperimentError> {
    let mut targets: Vec<&FeatureWindow> = windows
        .iter()
        .filter(|w| w.stage == opts.target_stage)
        .collect();
    targets.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
    let mut sensors = opts.sensors.clone();
    sensors.sort();
    sensors.dedup();

    let mut out = ExperimentOutput::default();
    let mut jobs = Vec::new();
    for w in targets {
        let example = windows
            .iter()
            .find(|e| e.participant_id == w.participant_id && e.stage == opts.example_stage);
        if opts.mode == PromptMode::OneShot && example.is_none() {
            out.skipped.push(w.participant_id.clone());
            continue;
        }
        let example = if opts.mode == PromptMode::OneShot {
            example
        } else {
            None
        };
        for &sensor in &sensors {
            jobs.push(Job {
                window: w,
                example,
                sensor,
            });
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.max_in_flight.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let results: Vec<Result<(PredictionRow, PromptFile, String), ExperimentError>> =
        pool.install(|| {
            jobs.par_iter()
                .map(|job| run_job(job, catalog, opts, backend))
                .collect()
        });
    for r in results {
        let (row, prompt, raw) = r?;
        out.recordings.insert(row.prompt_hash.clone(), raw);
        out.rows.push(row);
        out.prompts.push(prompt);
    }
    Ok(out)
}

fn run_job(
    job: &Job<'_>,
    catalog: &FeatureCatalog,
    opts: &ExperimentOptions,
    backend: &dyn LlmBackend,
) -> Result<(PredictionRow, PromptFile, String), ExperimentError> {
    let w = job.window;
    let text = build_prompt(w, job.example, catalog, job.sensor, opts.mode)?;
    let hash = prompt_hash(&text);
    let max_attempts = opts.max_retries + 1;
    let mut attempts = 0;
    let (raw, parsed) = loop {
        attempts += 1;
        match backend.complete(&text) {
            Ok(raw) => {
                let parsed = parse_response(&raw);
                if parsed.is_ok() || attempts >= max_attempts {
                    break (raw, parsed);
                }
            }
            Err(source)
                if attempts >= max_attempts || matches!(source, BackendError::ReplayMiss(_)) =>
            {
                return Err(ExperimentError::Backend {
                    participant: w.participant_id.clone(),
                    sensor: job.sensor,
                    attempts,
                    source,
                })
            }
            Err(_) => {}
        }
    };
    let row = PredictionRow {
        participant: w.participant_id.clone(),
        stage: w.stage,
        sensor: job.sensor,
        mode: opts.mode,
        prompt_hash: hash,
        raw_hash: prompt_hash(&raw),
        valid: parsed.is_ok(),
        error: parsed.as_ref().err().map(|e| e.code().to_string()),
        attempts,
        entries: parsed.map(|p| p.entries().to_vec()).unwrap_or_default(),
    };
    let prompt = PromptFile {
        rel_path: format!(
            "{}/{}/{}.txt",
            w.stage.slug(),
            job.sensor.slug(),
            w.participant_id
        ),
        text,
    };
    Ok((row, prompt, raw))
}

pub fn write_predictions<W: Write>(mut w: W, rows: &[PredictionRow]) -> std::io::Result<()> {
    for r in rows {
        writeln!(w, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

pub fn read_predictions<R: BufRead>(r: R) -> Result<Vec<PredictionRow>, String> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}
