//! Run configuration: a TOML document with flag overrides applied on top.

use std::path::{Path, PathBuf};

use lonesense_core::dataset::{CoverageRule, Target};
use lonesense_core::features::ExtractParams;
use lonesense_core::forest::{ForestConfig, ImportanceSource, RfeConfig};
use lonesense_core::llm::{BackendConfig, PromptMode};
use lonesense_core::model::{SensorKind, Stage};
use lonesense_core::synth::CohortSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub work_dir: PathBuf,
    /// Directory of raw sensor logs plus `roster.csv`; defaults to `<work_dir>/synth`.
    pub raw_dir: Option<PathBuf>,
    /// Defaults to `<raw_dir>/assessments.csv`.
    pub assessments: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            work_dir: PathBuf::from("work"),
            raw_dir: None,
            assessments: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeSettings {
    pub folds: usize,
    pub step: usize,
    pub min_features: usize,
    pub importance: ImportanceSource,
    pub seed: u64,
    pub target: Target,
    pub stages: Vec<Stage>,
}

impl Default for RfeSettings {
    fn default() -> Self {
        let core = RfeConfig::default();
        Self {
            folds: core.folds,
            // One feature per step over 1064 columns is too slow for routine runs.
            step: 25,
            min_features: core.min_features,
            importance: core.importance,
            seed: core.seed,
            target: Target::Total,
            stages: Stage::ALL.to_vec(),
        }
    }
}

impl RfeSettings {
    pub fn core(&self) -> RfeConfig {
        RfeConfig {
            folds: self.folds,
            step: self.step,
            min_features: self.min_features,
            importance: self.importance,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    pub target_stage: Stage,
    pub example_stage: Stage,
    /// Score items 3 and 6 in reverse before summing predicted totals.
    pub reverse_coded: bool,
    pub sensors: Vec<SensorKind>,
    pub modes: Vec<PromptMode>,
}

impl Default for LlmSettings {
    fn default() -> Self {
        Self {
            target_stage: Stage::EndOfSemester,
            example_stage: Stage::Midterm,
            reverse_coded: true,
            sensors: SensorKind::ALL.to_vec(),
            modes: vec![PromptMode::ZeroShot, PromptMode::OneShot],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set, replaces the synth, forest and RFE seeds.
    pub seed: Option<u64>,
    /// Worker thread bound for every parallel stage.
    pub jobs: Option<usize>,
    pub paths: Paths,
    pub synth: CohortSpec,
    pub extract: ExtractParams,
    pub coverage: CoverageRule,
    pub forest: ForestConfig,
    pub rfe: RfeSettings,
    pub llm: LlmSettings,
    pub backend: BackendConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::MissingConfig(path.to_path_buf()),
            _ => CliError::Io {
                path: path.to_path_buf(),
                source: e,
            },
        })?;
        Self::parse(&text)
    }

    /// Unknown keys are rejected at any depth.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut unknown = Vec::new();
        let cfg: Self = serde_ignored::deserialize(doc, |path| unknown.push(path.to_string()))
            .map_err(|e| CliError::Config(e.to_string()))?;
        if unknown.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::Config(format!(
                "unknown key `{}`",
                unknown.join("`, `")
            )))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Push the global seed into every seeded component.
    pub fn apply_seed(&mut self) {
        if let Some(s) = self.seed {
            self.synth.seed = s;
            self.forest.rng_seed = s;
            self.rfe.seed = s;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());
        self.synth.validate().map_err(|e| c(&e))?;
        self.forest.validate().map_err(|e| c(&e))?;
        self.backend.validate().map_err(|e| c(&e))?;
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        if self.rfe.folds < 2 || self.rfe.step == 0 || self.rfe.min_features == 0 {
            return Err(CliError::Config(
                "rfe needs folds >= 2, step >= 1 and min_features >= 1".into(),
            ));
        }
        if self.llm.target_stage == self.llm.example_stage {
            return Err(CliError::Config(
                "llm target and example stages must differ".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, leaving out settings that affect
    /// where and how fast things run but not what they produce.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("struct");
        obj.remove("jobs");
        obj.remove("paths");
        if let Some(b) = obj.get_mut("backend").and_then(|b| b.as_object_mut()) {
            for k in [
                "backend",
                "replay_path",
                "timeout_s",
                "max_in_flight",
                "endpoint",
                "credential_env",
            ] {
                b.remove(k);
            }
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn raw_dir(&self) -> PathBuf {
        self.paths
            .raw_dir
            .clone()
            .unwrap_or_else(|| self.paths.work_dir.join("synth"))
    }

    pub fn assessments_path(&self) -> PathBuf {
        self.paths
            .assessments
            .clone()
            .unwrap_or_else(|| self.raw_dir().join("assessments.csv"))
    }
}
