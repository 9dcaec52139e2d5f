//! Daily behavioral features per sensor.
//!
//! Every extractor is a pure function of one participant-day of events for a
//! single sensor. A sensor with no events on a day yields zeros and is marked
//! missing; the row itself is never dropped.

mod apps;
mod battery;
mod catalog;
mod describe;
mod keyboard;
mod location;
mod screen;
mod social;
mod table;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::Roster;
use crate::model::{SensorEvent, SensorKind};
use crate::time::Zone;

pub use apps::extract_applications;
pub use battery::extract_battery;
pub use catalog::{
    sensor_features, CatalogError, FeatureCatalog, FeatureDef, DEFAULT_APP_CATEGORIES,
};
pub use describe::{describe_feature, format_value, DescribeError};
pub use keyboard::extract_keyboard;
pub use location::{extract_locations, haversine_m, stay_clusters, StayCluster};
pub use screen::extract_screen;
pub use social::{extract_calls, extract_messages};
pub use table::{read_feature_tables, write_feature_table, write_missing_table, TableError};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractParams {
    pub stay_radius_m: f64,
    pub min_stay_s: f64,
    pub moving_speed_threshold_kmh: f64,
    pub session_gap_s: f64,
    pub app_categories: Vec<String>,
    /// Package id → category. Unknown packages count as `other`.
    pub category_map: BTreeMap<String, String>,
}

impl Default for ExtractParams {
    fn default() -> Self {
        let category_map = [
            ("com.facebook.katana", "social"),
            ("com.instagram.android", "social"),
            ("com.twitter.android", "social"),
            ("com.zhiliaoapp.musically", "social"),
            ("com.tinder", "dating"),
            ("com.bumble.app", "dating"),
            ("com.google.android.youtube", "entertainment"),
            ("com.netflix.mediaclient", "entertainment"),
            ("com.spotify.music", "entertainment"),
            ("com.whatsapp", "communication"),
            ("com.tencent.mm", "communication"),
            ("com.google.android.gm", "communication"),
            ("com.microsoft.teams", "productivity"),
            ("com.google.android.apps.docs", "productivity"),
            ("com.supercell.clashroyale", "games"),
            ("com.king.candycrushsaga", "games"),
            ("com.duolingo", "education"),
            ("org.coursera.android", "education"),
        ]
        .into_iter()
        .map(|(p, c)| (p.to_string(), c.to_string()))
        .collect();
        Self {
            stay_radius_m: 100.0,
            min_stay_s: 600.0,
            moving_speed_threshold_kmh: 1.0,
            session_gap_s: 5.0,
            app_categories: DEFAULT_APP_CATEGORIES
                .iter()
                .map(|s| s.to_string())
                .collect(),
            category_map,
        }
    }
}

impl ExtractParams {
    pub fn catalog(&self) -> FeatureCatalog {
        FeatureCatalog::standard(&self.app_categories)
    }

    pub fn category_of(&self, package: &str) -> &str {
        self.category_map
            .get(package)
            .map(String::as_str)
            .filter(|c| self.app_categories.iter().any(|k| k == c))
            .unwrap_or("other")
    }
}

/// Local calendar day as a half-open UTC interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayWindow {
    pub date: NaiveDate,
    pub start_ms: i64,
    pub end_ms: i64,
    pub zone: Zone,
}

impl DayWindow {
    pub fn new(date: NaiveDate, zone: Zone) -> Self {
        let (start_ms, end_ms) = zone.day_bounds(date);
        Self {
            date,
            start_ms,
            end_ms,
            zone,
        }
    }

    pub fn minutes_after_midnight(&self, ts_ms: i64) -> f64 {
        self.zone.localize(ts_ms).minutes()
    }
}

/// One sensor's events for one participant-day.
///
/// `events` are time-ordered and lie in `[window.start_ms, window.end_ms)`.
/// `prior` is the last event of the same sensor before the day started; state
/// sensors use it to know the state at midnight.
#[derive(Debug, Clone, Copy)]
pub struct DaySlice<'a> {
    pub window: DayWindow,
    pub prior: Option<&'a SensorEvent>,
    pub events: &'a [SensorEvent],
}

/// Feature values for one sensor-day plus which of them are missing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureMap {
    pub values: BTreeMap<String, f64>,
    pub missing: BTreeSet<String>,
    pub has_data: bool,
}

impl FeatureMap {
    pub(crate) fn with_data() -> Self {
        Self {
            has_data: true,
            ..Default::default()
        }
    }

    /// All-zero map with every feature flagged missing.
    pub fn empty(defs: &[FeatureDef]) -> Self {
        Self {
            values: defs.iter().map(|d| (d.name.clone(), 0.0)).collect(),
            missing: defs.iter().map(|d| d.name.clone()).collect(),
            has_data: false,
        }
    }

    pub(crate) fn set(&mut self, name: &str, v: f64) {
        self.values.insert(name.to_string(), v);
    }

    pub(crate) fn set_missing(&mut self, name: &str) {
        self.values.insert(name.to_string(), 0.0);
        self.missing.insert(name.to_string());
    }

    pub fn get(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(0.0)
    }

    pub fn is_missing(&self, name: &str) -> bool {
        self.missing.contains(name)
    }
}

/// Run the extractor for `sensor`.
pub fn extract_sensor(
    sensor: SensorKind,
    day: &DaySlice<'_>,
    params: &ExtractParams,
) -> FeatureMap {
    match sensor {
        SensorKind::Screen => extract_screen(day),
        SensorKind::Locations => extract_locations(day, params),
        SensorKind::Battery => extract_battery(day),
        SensorKind::Keyboard => extract_keyboard(day, params.session_gap_s),
        SensorKind::Calls => extract_calls(day),
        SensorKind::Messages => extract_messages(day),
        SensorKind::Applications => extract_applications(day, params),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyFeatureRow {
    pub participant_id: String,
    pub date: NaiveDate,
    pub values: BTreeMap<String, f64>,
    pub missing: BTreeSet<String>,
    pub has_any_data: BTreeMap<SensorKind, bool>,
}

impl DailyFeatureRow {
    /// A day with no data from any sensor.
    pub fn empty(participant_id: &str, date: NaiveDate, catalog: &FeatureCatalog) -> Self {
        Self {
            participant_id: participant_id.to_string(),
            date,
            values: catalog.iter().map(|f| (f.name.clone(), 0.0)).collect(),
            missing: catalog.iter().map(|f| f.name.clone()).collect(),
            has_any_data: SensorKind::ALL.iter().map(|&k| (k, false)).collect(),
        }
    }

    pub fn value(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(0.0)
    }

    pub fn any_sensor_data(&self) -> bool {
        self.has_any_data.values().any(|&b| b)
    }
}

/// Events of one participant split by sensor, each list time-ordered.
fn split_by_sensor(events: &[SensorEvent]) -> BTreeMap<SensorKind, Vec<SensorEvent>> {
    let mut m: BTreeMap<SensorKind, Vec<SensorEvent>> = BTreeMap::new();
    for e in events {
        m.entry(e.kind()).or_default().push(e.clone());
    }
    for v in m.values_mut() {
        v.sort_by_key(|e| e.timestamp_ms);
    }
    m
}

fn slice<'a>(events: &'a [SensorEvent], window: DayWindow) -> DaySlice<'a> {
    let lo = events.partition_point(|e| e.timestamp_ms < window.start_ms);
    let hi = events.partition_point(|e| e.timestamp_ms < window.end_ms);
    DaySlice {
        window,
        prior: lo.checked_sub(1).map(|i| &events[i]),
        events: &events[lo..hi],
    }
}

/// Extract one row per local calendar day in `dates` for a single participant.
pub fn extract_days(
    participant_id: &str,
    events: &[SensorEvent],
    zone: Zone,
    dates: &[NaiveDate],
    params: &ExtractParams,
    catalog: &FeatureCatalog,
) -> Vec<DailyFeatureRow> {
    let by_sensor = split_by_sensor(events);
    let none: Vec<SensorEvent> = Vec::new();
    dates
        .iter()
        .map(|&date| {
            let window = DayWindow::new(date, zone);
            let mut row = DailyFeatureRow::empty(participant_id, date, catalog);
            row.missing.clear();
            for sensor in SensorKind::ALL {
                let evs = by_sensor.get(&sensor).unwrap_or(&none);
                let fm = extract_sensor(sensor, &slice(evs, window), params);
                row.has_any_data.insert(sensor, fm.has_data);
                for def in catalog.for_sensor(sensor) {
                    row.values.insert(def.name.clone(), fm.get(&def.name));
                    if fm.is_missing(&def.name) {
                        row.missing.insert(def.name.clone());
                    }
                }
            }
            row
        })
        .collect()
}

/// Every local date touched by the participant's events, first to last inclusive.
pub fn date_span(events: &[SensorEvent], zone: Zone) -> Vec<NaiveDate> {
    let dates = events.iter().map(|e| zone.localize(e.timestamp_ms).date);
    let (Some(first), Some(last)) = (dates.clone().min(), dates.max()) else {
        return Vec::new();
    };
    first.iter_days().take_while(|d| *d <= last).collect()
}

/// Extract daily rows for every participant; output order is by participant then date.
pub fn extract_all(
    by_participant: &BTreeMap<String, Vec<SensorEvent>>,
    roster: &Roster,
    params: &ExtractParams,
) -> Vec<DailyFeatureRow> {
    let catalog = params.catalog();
    let work: Vec<(&String, &Vec<SensorEvent>)> = by_participant.iter().collect();
    let per: BTreeMap<&String, Vec<DailyFeatureRow>> = work
        .par_iter()
        .map(|(pid, evs)| {
            let zone = roster.zone_for(pid);
            let dates = date_span(evs, zone);
            (*pid, extract_days(pid, evs, zone, &dates, params, &catalog))
        })
        .collect();
    per.into_values().flatten().collect()
}
