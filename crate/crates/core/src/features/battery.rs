use super::{sensor_features, DaySlice, FeatureMap};
use crate::model::{ChargeState, Payload, SensorKind};
use crate::stats;

/// Maximal runs of constant charging state, truncated to the day.
pub(crate) fn charge_episodes(day: &DaySlice<'_>) -> Vec<(ChargeState, i64, i64)> {
    let w = &day.window;
    let state_of = |p: &Payload| match p {
        Payload::Battery { state, .. } => Some(*state),
        _ => None,
    };
    let mut current: Option<(ChargeState, i64)> = day
        .prior
        .and_then(|e| state_of(&e.payload))
        .map(|s| (s, w.start_ms));
    let mut out = Vec::new();
    for e in day.events {
        let Some(s) = state_of(&e.payload) else {
            continue;
        };
        match current {
            Some((cs, _)) if cs == s => {}
            Some((cs, start)) => {
                out.push((cs, start, e.timestamp_ms));
                current = Some((s, e.timestamp_ms));
            }
            None => current = Some((s, e.timestamp_ms)),
        }
    }
    if let Some((cs, start)) = current {
        out.push((cs, start, w.end_ms));
    }
    out.retain(|(_, s, e)| e > s);
    out
}

pub fn extract_battery(day: &DaySlice<'_>) -> FeatureMap {
    if day.events.is_empty() {
        return FeatureMap::empty(&sensor_features(SensorKind::Battery, &[]));
    }
    let episodes = charge_episodes(day);
    let durations = |want: ChargeState| -> Vec<f64> {
        episodes
            .iter()
            .filter(|(s, _, _)| *s == want)
            .map(|(_, a, b)| (b - a) as f64 / 1000.0)
            .collect()
    };
    let charge = durations(ChargeState::Charging);
    let discharge = durations(ChargeState::Discharging);
    let levels: Vec<f64> = day
        .events
        .iter()
        .filter_map(|e| match e.payload {
            Payload::Battery { level, .. } => Some(level),
            _ => None,
        })
        .collect();

    let mut f = FeatureMap::with_data();
    f.set("battery_charge_episode_count", charge.len() as f64);
    f.set("battery_charge_duration_total", charge.iter().sum());
    f.set("battery_discharge_episode_count", discharge.len() as f64);
    f.set("battery_discharge_duration_total", discharge.iter().sum());
    for (name, v) in [
        ("battery_charge_duration_avg", &charge),
        ("battery_discharge_duration_avg", &discharge),
    ] {
        if v.is_empty() {
            f.set_missing(name);
        } else {
            f.set(name, stats::mean(v));
        }
    }
    f.set("battery_level_mean", stats::mean(&levels));
    f.set("battery_level_min", stats::min(&levels));
    f
}
