use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::SensorKind;

/// Default application categories. Packages not in the category map land in `other`.
pub const DEFAULT_APP_CATEGORIES: [&str; 8] = [
    "social",
    "dating",
    "entertainment",
    "communication",
    "productivity",
    "games",
    "education",
    "other",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub sensor: SensorKind,
    pub unit: String,
    /// Human-readable text, used verbatim as the lead of prompt lines.
    pub description: String,
}

/// Ordered feature list; order defines every table's column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCatalog {
    features: Vec<FeatureDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("duplicate feature name `{0}`")]
    Duplicate(String),
    #[error("unknown feature `{0}`")]
    Unknown(String),
}

impl FeatureCatalog {
    pub fn new(features: Vec<FeatureDef>) -> Result<Self, CatalogError> {
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(CatalogError::Duplicate(f.name.clone()));
            }
        }
        Ok(Self { features })
    }

    /// Full catalog for the configured application categories.
    pub fn standard(app_categories: &[String]) -> Self {
        let mut out = Vec::new();
        for sensor in SensorKind::ALL {
            out.extend(sensor_features(sensor, app_categories));
        }
        Self::new(out).expect("built-in names are unique")
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeatureDef> {
        self.features.iter()
    }

    pub fn get(&self, name: &str) -> Option<&FeatureDef> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn for_sensor(&self, sensor: SensorKind) -> impl Iterator<Item = &FeatureDef> {
        self.features.iter().filter(move |f| f.sensor == sensor)
    }

    /// Restrict to a subset of names, keeping catalog order.
    pub fn select(&self, names: &[&str]) -> Result<Self, CatalogError> {
        for n in names {
            if self.get(n).is_none() {
                return Err(CatalogError::Unknown(n.to_string()));
            }
        }
        Ok(Self {
            features: self
                .features
                .iter()
                .filter(|f| names.contains(&f.name.as_str()))
                .cloned()
                .collect(),
        })
    }

    /// Markdown reference listing every feature.
    pub fn reference_doc(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Feature catalog\n");
        let _ = writeln!(s, "{} daily features.\n", self.len());
        let mut by_sensor: BTreeMap<SensorKind, Vec<&FeatureDef>> = BTreeMap::new();
        for f in &self.features {
            by_sensor.entry(f.sensor).or_default().push(f);
        }
        for (sensor, defs) in by_sensor {
            let _ = writeln!(s, "## {sensor} ({})\n", defs.len());
            let _ = writeln!(s, "| column | unit | description |");
            let _ = writeln!(s, "|---|---|---|");
            for f in defs {
                let _ = writeln!(s, "| `{}` | {} | {} |", f.name, f.unit, f.description);
            }
            s.push('\n');
        }
        s
    }
}

fn def(name: &str, sensor: SensorKind, unit: &str, description: &str) -> FeatureDef {
    FeatureDef {
        name: name.to_string(),
        sensor,
        unit: unit.to_string(),
        description: description.to_string(),
    }
}

/// Feature definitions for one sensor, in output order.
pub fn sensor_features(sensor: SensorKind, app_categories: &[String]) -> Vec<FeatureDef> {
    use SensorKind::*;
    let d = |n: &str, u: &str, t: &str| def(n, sensor, u, t);
    match sensor {
        Screen => vec![
            d(
                "screen_unlock_episode_count",
                "count",
                "Unlock episode count",
            ),
            d(
                "screen_unlock_duration_total",
                "s",
                "Total unlock duration (s)",
            ),
            d(
                "screen_unlock_duration_avg",
                "s",
                "Average unlock duration (s)",
            ),
            d(
                "screen_unlock_duration_min",
                "s",
                "Minimum unlock duration (s)",
            ),
            d(
                "screen_unlock_duration_max",
                "s",
                "Maximum unlock duration (s)",
            ),
            d(
                "screen_unlock_duration_std",
                "s",
                "Standard deviation of unlock duration (s)",
            ),
            d(
                "screen_first_unlock_after_midnight",
                "min",
                "First unlock time after midnight (minutes)",
            ),
            d(
                "screen_last_unlock_time",
                "min",
                "Last unlock time (minutes after midnight)",
            ),
            d(
                "screen_night_unlock_count",
                "count",
                "Unlock count between midnight and 6 am",
            ),
            d(
                "screen_time_between_unlocks_avg",
                "s",
                "Average time between unlocks (s)",
            ),
            d(
                "screen_time_between_unlocks_std",
                "s",
                "Standard deviation of time between unlocks (s)",
            ),
        ],
        Locations => vec![
            d(
                "locations_average_speed",
                "m/s",
                "Average speed while moving (m/s)",
            ),
            d("locations_max_speed", "m/s", "Maximum speed (m/s)"),
            d("locations_moving_time", "s", "Time spent moving (s)"),
            d("locations_static_time", "s", "Time spent static (s)"),
            d(
                "locations_moving_to_static_ratio",
                "ratio",
                "Moving to static ratio",
            ),
            d(
                "locations_travel_distance",
                "m",
                "Total travel distance (m)",
            ),
            d(
                "locations_distinct_clusters",
                "count",
                "Number of distinct location clusters visited",
            ),
            d(
                "locations_stay_length_std",
                "s",
                "Standard deviation of stay length at clusters (s)",
            ),
            d(
                "locations_time_at_top_cluster",
                "s",
                "Time at most-visited location cluster (s)",
            ),
            d(
                "locations_total_stay_time",
                "s",
                "Total time at location clusters (s)",
            ),
            d("locations_entropy", "nats", "Location entropy"),
            d(
                "locations_normalized_entropy",
                "ratio",
                "Normalized location entropy",
            ),
            d("locations_fix_count", "count", "Number of location fixes"),
        ],
        Battery => vec![
            d(
                "battery_charge_episode_count",
                "count",
                "Battery charging episode count",
            ),
            d(
                "battery_charge_duration_total",
                "s",
                "Total charging duration (s)",
            ),
            d(
                "battery_charge_duration_avg",
                "s",
                "Average charging episode duration (s)",
            ),
            d(
                "battery_discharge_episode_count",
                "count",
                "Battery discharging episode count",
            ),
            d(
                "battery_discharge_duration_total",
                "s",
                "Total discharge duration (s)",
            ),
            d(
                "battery_discharge_duration_avg",
                "s",
                "Average discharging episode duration (s)",
            ),
            d("battery_level_mean", "%", "Average battery level (%)"),
            d("battery_level_min", "%", "Minimum battery level (%)"),
        ],
        Keyboard => vec![
            d("keyboard_key_press_count", "count", "Key press count"),
            d(
                "keyboard_text_length_change",
                "chars",
                "Net change in text length (characters)",
            ),
            d("keyboard_text_added", "chars", "Characters added"),
            d("keyboard_text_removed", "chars", "Characters removed"),
            d("keyboard_session_count", "count", "Typing session count"),
            d(
                "keyboard_session_length_avg",
                "s",
                "Average typing session length (s)",
            ),
            d(
                "keyboard_session_length_total",
                "s",
                "Total typing session length (s)",
            ),
            d(
                "keyboard_inter_key_delay_avg",
                "ms",
                "Average inter-key delay (ms)",
            ),
        ],
        Calls => vec![
            d("calls_incoming_count", "count", "Incoming call count"),
            d("calls_outgoing_count", "count", "Outgoing call count"),
            d("calls_missed_count", "count", "Missed call count"),
            d(
                "calls_incoming_duration",
                "s",
                "Total incoming call duration (s)",
            ),
            d(
                "calls_outgoing_duration",
                "s",
                "Total outgoing call duration (s)",
            ),
            d("calls_total_duration", "s", "Total call duration (s)"),
            d(
                "calls_average_duration",
                "s",
                "Average connected call duration (s)",
            ),
            d("calls_max_duration", "s", "Longest call duration (s)"),
            d("calls_distinct_contacts", "count", "Distinct call contacts"),
            d(
                "calls_most_frequent_contact_count",
                "count",
                "Calls with the most frequent contact",
            ),
        ],
        Messages => vec![
            d("messages_sent_count", "count", "Messages sent"),
            d("messages_received_count", "count", "Messages received"),
            d("messages_total_count", "count", "Total messages"),
            d(
                "messages_distinct_contacts",
                "count",
                "Distinct message contacts",
            ),
            d(
                "messages_distinct_sent_contacts",
                "count",
                "Distinct contacts messaged",
            ),
            d(
                "messages_distinct_received_contacts",
                "count",
                "Distinct contacts messaging the user",
            ),
            d(
                "messages_most_frequent_contact_count",
                "count",
                "Messages with the most frequent contact",
            ),
        ],
        Applications => {
            let mut v = vec![
                d("apps_total_duration", "s", "Total app usage duration (s)"),
                d("apps_episode_count", "count", "App usage episode count"),
                d("apps_distinct_count", "count", "Distinct apps used"),
            ];
            for c in app_categories {
                v.push(d(
                    &format!("apps_{c}_duration"),
                    "s",
                    &format!("Total {c} app usage duration (s)"),
                ));
                v.push(d(
                    &format!("apps_{c}_episode_count"),
                    "count",
                    &format!("{} app usage episode count", capitalize(c)),
                ));
            }
            v
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
