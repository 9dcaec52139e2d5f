//! Domain types shared by the whole pipeline and the ULS-8 scale definition.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of items on the ULS-8 short form.
pub const ITEM_COUNT: usize = 8;

/// 1-indexed items that are reverse-scored (`score -> 5 - score`).
pub const REVERSE_ITEMS: [usize; 2] = [3, 6];

pub const MIN_ITEM_SCORE: u8 = 1;
pub const MAX_ITEM_SCORE: u8 = 4;
pub const MIN_TOTAL: u8 = 8;
pub const MAX_TOTAL: u8 = 32;

const ITEM_TEXT: [&str; ITEM_COUNT] = [
    "I lack companionship.",
    "There is no one I can turn to.",
    "I am an outgoing person.",
    "I feel left out.",
    "I feel isolated from others.",
    "I can find companionship when I want it.",
    "I am unhappy being so withdrawn.",
    "People are around me but not with me.",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaleError {
    #[error("expected {ITEM_COUNT} item scores, got {0}")]
    Arity(usize),
    #[error("item {item} has score {score}, expected 1..=4")]
    ItemOutOfRange { item: usize, score: i64 },
    #[error("item index {0} is outside 1..=8")]
    IndexOutOfRange(usize),
}

/// Returns true when the 1-indexed item is reverse-scored.
pub fn is_reverse_item(item: usize) -> bool {
    REVERSE_ITEMS.contains(&item)
}

/// Scored value of a single raw response for the given 1-indexed item.
pub fn scored_item(item: usize, raw: u8) -> u8 {
    if is_reverse_item(item) {
        (MAX_ITEM_SCORE + MIN_ITEM_SCORE) - raw
    } else {
        raw
    }
}

/// ULS-8 total with items 3 and 6 reverse-coded. Always in `8..=32`.
pub fn score_total(item_scores: &[i64]) -> Result<u8, ScaleError> {
    let raw = validate_items(item_scores)?;
    Ok(raw
        .iter()
        .enumerate()
        .map(|(i, &s)| scored_item(i + 1, s))
        .sum())
}

fn validate_items(item_scores: &[i64]) -> Result<[u8; ITEM_COUNT], ScaleError> {
    if item_scores.len() != ITEM_COUNT {
        return Err(ScaleError::Arity(item_scores.len()));
    }
    let mut out = [0u8; ITEM_COUNT];
    for (i, &s) in item_scores.iter().enumerate() {
        if !(MIN_ITEM_SCORE as i64..=MAX_ITEM_SCORE as i64).contains(&s) {
            return Err(ScaleError::ItemOutOfRange {
                item: i + 1,
                score: s,
            });
        }
        out[i] = s as u8;
    }
    Ok(out)
}

/// Verbatim wording of a 1-indexed ULS-8 item.
pub fn item_text(index: usize) -> Result<&'static str, ScaleError> {
    if (1..=ITEM_COUNT).contains(&index) {
        Ok(ITEM_TEXT[index - 1])
    } else {
        Err(ScaleError::IndexOutOfRange(index))
    }
}

/// Eight raw responses on the 1..=4 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Uls8Record {
    items: [u8; ITEM_COUNT],
}

impl Uls8Record {
    pub fn new(item_scores: &[i64]) -> Result<Self, ScaleError> {
        Ok(Self {
            items: validate_items(item_scores)?,
        })
    }

    /// Raw responses, index 0 is item 1.
    pub fn items(&self) -> &[u8; ITEM_COUNT] {
        &self.items
    }

    /// Raw response for a 1-indexed item.
    pub fn item(&self, index: usize) -> u8 {
        self.items[index - 1]
    }

    pub fn total(&self) -> u8 {
        self.items
            .iter()
            .enumerate()
            .map(|(i, &s)| scored_item(i + 1, s))
            .sum()
    }
}

impl TryFrom<Vec<i64>> for Uls8Record {
    type Error = ScaleError;
    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        Self::new(&v)
    }
}

impl From<Uls8Record> for Vec<i64> {
    fn from(r: Uls8Record) -> Self {
        r.items.iter().map(|&s| s as i64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensorKind {
    Applications,
    Battery,
    Calls,
    Keyboard,
    Locations,
    Messages,
    Screen,
}

impl SensorKind {
    pub const ALL: [SensorKind; 7] = [
        SensorKind::Applications,
        SensorKind::Battery,
        SensorKind::Calls,
        SensorKind::Keyboard,
        SensorKind::Locations,
        SensorKind::Messages,
        SensorKind::Screen,
    ];

    /// Display name, also substituted into prompts.
    pub fn name(self) -> &'static str {
        match self {
            SensorKind::Applications => "Applications",
            SensorKind::Battery => "Battery",
            SensorKind::Calls => "Calls",
            SensorKind::Keyboard => "Keyboard",
            SensorKind::Locations => "Locations",
            SensorKind::Messages => "Messages",
            SensorKind::Screen => "Screen",
        }
    }

    /// Lowercase token used in file names and the `sensor` column of logs.
    pub fn slug(self) -> &'static str {
        match self {
            SensorKind::Applications => "applications",
            SensorKind::Battery => "battery",
            SensorKind::Calls => "calls",
            SensorKind::Keyboard => "keyboard",
            SensorKind::Locations => "locations",
            SensorKind::Messages => "messages",
            SensorKind::Screen => "screen",
        }
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown sensor kind `{0}`")]
pub struct UnknownSensor(pub String);

impl FromStr for SensorKind {
    type Err = UnknownSensor;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let kind = match lower.as_str() {
            "applications" | "application" | "apps" | "app" => SensorKind::Applications,
            "battery" => SensorKind::Battery,
            "calls" | "call" => SensorKind::Calls,
            "keyboard" => SensorKind::Keyboard,
            "locations" | "location" => SensorKind::Locations,
            "messages" | "message" => SensorKind::Messages,
            "screen" => SensorKind::Screen,
            _ => return Err(UnknownSensor(s.to_string())),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScreenState {
    Unlock,
    Lock,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargeState {
    Charging,
    Discharging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CallDirection {
    Incoming,
    Outgoing,
    Missed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageDirection {
    Sent,
    Received,
}

/// Opaque, pre-hashed contact identifier. Raw identifiers never enter the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContactToken(pub String);

/// Kind-specific event payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sensor", rename_all = "lowercase")]
pub enum Payload {
    Screen {
        state: ScreenState,
    },
    Locations {
        latitude: f64,
        longitude: f64,
        speed: Option<f64>,
    },
    Battery {
        level: f64,
        state: ChargeState,
    },
    Keyboard {
        text_delta: i64,
    },
    Calls {
        direction: CallDirection,
        duration_s: f64,
        contact: ContactToken,
    },
    Messages {
        direction: MessageDirection,
        contact: ContactToken,
    },
    /// Foreground episode; the event timestamp is the episode start.
    Applications {
        package: String,
        end_ms: i64,
    },
}

impl Payload {
    pub fn kind(&self) -> SensorKind {
        match self {
            Payload::Screen { .. } => SensorKind::Screen,
            Payload::Locations { .. } => SensorKind::Locations,
            Payload::Battery { .. } => SensorKind::Battery,
            Payload::Keyboard { .. } => SensorKind::Keyboard,
            Payload::Calls { .. } => SensorKind::Calls,
            Payload::Messages { .. } => SensorKind::Messages,
            Payload::Applications { .. } => SensorKind::Applications,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorEvent {
    pub participant_id: String,
    /// Epoch milliseconds, UTC. Strictly positive.
    pub timestamp_ms: i64,
    #[serde(flatten)]
    pub payload: Payload,
}

impl SensorEvent {
    pub fn kind(&self) -> SensorKind {
        self.payload.kind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    Midterm,
    EndOfSemester,
}

impl Stage {
    pub const ALL: [Stage; 2] = [Stage::Midterm, Stage::EndOfSemester];

    pub fn slug(self) -> &'static str {
        match self {
            Stage::Midterm => "midterm",
            Stage::EndOfSemester => "end",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "midterm" | "mid" => Ok(Stage::Midterm),
            "end" | "endofsemester" | "end-of-semester" | "end_of_semester" => {
                Ok(Stage::EndOfSemester)
            }
            other => Err(format!("unknown stage `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentPoint {
    pub participant_id: String,
    pub stage: Stage,
    pub assessment_date: NaiveDate,
    pub record: Uls8Record,
}
