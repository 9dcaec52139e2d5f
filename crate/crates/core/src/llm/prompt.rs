//! Zero-shot and one-shot prompt rendering from the shipped templates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureWindow;
use crate::features::{describe_feature, FeatureCatalog};
use crate::model::{SensorKind, Uls8Record, ITEM_COUNT};

pub const ZERO_SHOT_TEMPLATE: &str = include_str!("../../templates/zero_shot.txt");
pub const ONE_SHOT_TEMPLATE: &str = include_str!("../../templates/one_shot.txt");

const SENSOR_SLOT: &str = "{sensor}";
const FEATURE_SLOT: &str = "{feature description}";
const SCORES_SLOT: &str = "<Q1 score>, <Q2 score>, ..., <Q8 score>";

pub const FIRST_WEEK_LABEL: &str = "Daily activity metrics from Day 1 to Day 7 of the first week preceding the administration of the UCLA Loneliness Scale questionnaire:";
pub const SECOND_WEEK_LABEL: &str = "Daily activity metrics from Day 1 to Day 7 of the second week preceding the administration of the UCLA Loneliness Scale questionnaire:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    ZeroShot,
    OneShot,
}

impl PromptMode {
    pub fn slug(self) -> &'static str {
        match self {
            PromptMode::ZeroShot => "zero",
            PromptMode::OneShot => "one",
        }
    }
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for PromptMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "zero" | "zero_shot" => Ok(PromptMode::ZeroShot),
            "one" | "one_shot" => Ok(PromptMode::OneShot),
            other => Err(format!("unknown prompt mode `{other}`")),
        }
    }
}

/// Feature description lines for Days 1-7 and Days 8-14.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeekBlocks {
    pub week1: Vec<String>,
    pub week2: Vec<String>,
}

impl WeekBlocks {
    /// One `describe_feature` line per catalog feature of `sensor`.
    pub fn from_window(
        window: &FeatureWindow,
        catalog: &FeatureCatalog,
        sensor: SensorKind,
    ) -> Self {
        let mut out = WeekBlocks::default();
        for def in catalog.for_sensor(sensor) {
            let v = window.values(&def.name);
            out.week1
                .push(describe_feature(def, &v[..7]).expect("7 values"));
            out.week2
                .push(describe_feature(def, &v[7..]).expect("7 values"));
        }
        out
    }

    fn is_empty(&self) -> bool {
        self.week1.is_empty() || self.week2.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneShotExample {
    pub blocks: WeekBlocks,
    /// Raw 1-4 responses, not reverse-coded.
    pub record: Uls8Record,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub mode: PromptMode,
    pub sensor: SensorKind,
    pub subject: WeekBlocks,
    pub example: Option<OneShotExample>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("one-shot prompt needs an example window and scores")]
    MissingExample,
    #[error("zero-shot prompt takes no example")]
    UnexpectedExample,
    #[error("empty feature block")]
    EmptyBlock,
}

/// Fill `{feature description}` slots left to right.
fn fill(template: &str, sensor: SensorKind, blocks: &[String], scores: Option<&str>) -> String {
    let parts: Vec<&str> = template.split(FEATURE_SLOT).collect();
    assert_eq!(parts.len(), blocks.len() + 1, "template slot count");
    let mut out = String::new();
    for (i, part) in parts.iter().enumerate() {
        let mut p = part.replace(SENSOR_SLOT, sensor.name());
        if let Some(s) = scores {
            p = p.replace(SCORES_SLOT, s);
        }
        out.push_str(&p);
        if let Some(b) = blocks.get(i) {
            out.push_str(b);
        }
    }
    out
}

pub fn render_prompt(spec: &PromptSpec) -> Result<String, PromptError> {
    if spec.subject.is_empty() {
        return Err(PromptError::EmptyBlock);
    }
    match (spec.mode, &spec.example) {
        (PromptMode::ZeroShot, Some(_)) => Err(PromptError::UnexpectedExample),
        (PromptMode::OneShot, None) => Err(PromptError::MissingExample),
        (PromptMode::ZeroShot, None) => {
            let both = format!(
                "{FIRST_WEEK_LABEL}\n{}\n\n{SECOND_WEEK_LABEL}\n{}",
                spec.subject.week1.join("\n"),
                spec.subject.week2.join("\n")
            );
            Ok(fill(ZERO_SHOT_TEMPLATE, spec.sensor, &[both], None))
        }
        (PromptMode::OneShot, Some(ex)) => {
            if ex.blocks.is_empty() {
                return Err(PromptError::EmptyBlock);
            }
            let scores: Vec<String> = ex.record.items().iter().map(|s| s.to_string()).collect();
            debug_assert_eq!(scores.len(), ITEM_COUNT);
            let blocks = [
                ex.blocks.week1.join("\n"),
                ex.blocks.week2.join("\n"),
                spec.subject.week1.join("\n"),
                spec.subject.week2.join("\n"),
            ];
            Ok(fill(
                ONE_SHOT_TEMPLATE,
                spec.sensor,
                &blocks,
                Some(&scores.join(", ")),
            ))
        }
    }
}
