//! Validation of model output into an 8-entry prediction.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{Uls8Record, ITEM_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub entry: u8,
    pub score: u8,
    pub reason: String,
}

/// Exactly 8 entries, sorted by entry index, scores in 1..=4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmPrediction {
    entries: Vec<PredictionEntry>,
}

impl LlmPrediction {
    pub fn entries(&self) -> &[PredictionEntry] {
        &self.entries
    }

    /// Raw predicted responses, index 0 is item 1.
    pub fn scores(&self) -> [u8; ITEM_COUNT] {
        let mut out = [0; ITEM_COUNT];
        for e in &self.entries {
            out[e.entry as usize - 1] = e.score;
        }
        out
    }

    pub fn as_record(&self) -> Uls8Record {
        let s: Vec<i64> = self.scores().iter().map(|&v| v as i64).collect();
        Uls8Record::new(&s).expect("validated scores")
    }

    /// Build from entries in any order; applies the same checks as parsing.
    pub fn from_entries(mut entries: Vec<PredictionEntry>) -> Result<Self, ParseError> {
        if entries.len() != ITEM_COUNT {
            return Err(ParseError::Arity(entries.len()));
        }
        for e in &entries {
            if !(1..=ITEM_COUNT as u8).contains(&e.entry) {
                return Err(ParseError::Entry(e.entry as i64));
            }
            if !(1..=4).contains(&e.score) {
                return Err(ParseError::Range {
                    entry: e.entry,
                    score: e.score.to_string(),
                });
            }
        }
        entries.sort_by_key(|e| e.entry);
        if let Some(w) = entries.windows(2).find(|w| w[0].entry == w[1].entry) {
            return Err(ParseError::Duplicate(w[0].entry));
        }
        Ok(Self { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("expected {ITEM_COUNT} entries, got {0}")]
    Arity(usize),
    #[error("unexpected shape: {0}")]
    Schema(String),
    #[error("entry {entry} has score {score}, expected an integer in 1..=4")]
    Range { entry: u8, score: String },
    #[error("entry index {0} outside 1..=8")]
    Entry(i64),
    #[error("entry {0} appears more than once")]
    Duplicate(u8),
}

impl ParseError {
    /// Stable short code recorded next to invalid predictions.
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Json(_) => "json",
            ParseError::Arity(_) => "arity",
            ParseError::Schema(_) => "schema",
            ParseError::Range { .. } => "range",
            ParseError::Entry(_) => "entry",
            ParseError::Duplicate(_) => "duplicate",
        }
    }
}

/// Remove a surrounding Markdown code fence, with or without a language tag.
pub fn strip_fences(raw: &str) -> &str {
    let t = raw.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let body = match rest.find('\n') {
        Some(i) => &rest[i + 1..],
        None => rest,
    };
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

pub fn parse_response(raw: &str) -> Result<LlmPrediction, ParseError> {
    let v: Value =
        serde_json::from_str(strip_fences(raw)).map_err(|e| ParseError::Json(e.to_string()))?;
    let arr = v
        .as_array()
        .ok_or_else(|| ParseError::Schema("top level is not an array".into()))?;
    if arr.len() != ITEM_COUNT {
        return Err(ParseError::Arity(arr.len()));
    }
    let mut entries = Vec::with_capacity(ITEM_COUNT);
    for (i, item) in arr.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| ParseError::Schema(format!("element {} is not an object", i + 1)))?;
        let entry = obj.get("entry").and_then(Value::as_i64).ok_or_else(|| {
            ParseError::Schema(format!("element {} lacks an integer `entry`", i + 1))
        })?;
        if !(1..=ITEM_COUNT as i64).contains(&entry) {
            return Err(ParseError::Entry(entry));
        }
        let entry = entry as u8;
        let score = obj
            .get("score")
            .filter(|s| s.is_number())
            .ok_or_else(|| ParseError::Schema(format!("entry {entry} lacks a numeric `score`")))?;
        let score = match score.as_i64() {
            Some(s @ 1..=4) => s as u8,
            _ => {
                return Err(ParseError::Range {
                    entry,
                    score: score.to_string(),
                })
            }
        };
        let reason = obj
            .get("reason")
            .and_then(Value::as_str)
            .ok_or_else(|| ParseError::Schema(format!("entry {entry} lacks a string `reason`")))?;
        entries.push(PredictionEntry {
            entry,
            score,
            reason: reason.to_string(),
        });
    }
    LlmPrediction::from_entries(entries)
}

/// Compact JSON array in the response format; `parse_response` inverts it.
pub fn serialize(p: &LlmPrediction) -> String {
    serde_json::to_string(&p.entries).expect("plain data")
}
