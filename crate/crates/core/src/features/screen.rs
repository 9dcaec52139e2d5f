use super::{DaySlice, FeatureMap};
use crate::model::{Payload, ScreenState};
use crate::stats;

const NIGHT_END_MINUTES: f64 = 6.0 * 60.0;

/// Unlock episodes as `(start_ms, end_ms)`, truncated to the day.
///
/// An episode runs from an unlock to the next lock or off. A repeated unlock
/// inside an open episode does not start a new one. Zero-length episodes are dropped.
pub(crate) fn unlock_episodes(day: &DaySlice<'_>) -> Vec<(i64, i64)> {
    let w = &day.window;
    let mut open = match day.prior.map(|e| &e.payload) {
        Some(Payload::Screen {
            state: ScreenState::Unlock,
        }) => Some(w.start_ms),
        _ => None,
    };
    let mut out = Vec::new();
    for e in day.events {
        let Payload::Screen { state } = e.payload else {
            continue;
        };
        match state {
            ScreenState::Unlock => {
                open.get_or_insert(e.timestamp_ms);
            }
            ScreenState::Lock | ScreenState::Off => {
                if let Some(s) = open.take() {
                    out.push((s, e.timestamp_ms));
                }
            }
            ScreenState::On => {}
        }
    }
    if let Some(s) = open {
        out.push((s, w.end_ms));
    }
    out.retain(|(s, e)| e > s);
    out
}

pub fn extract_screen(day: &DaySlice<'_>) -> FeatureMap {
    if day.events.is_empty() {
        return FeatureMap::empty(&super::sensor_features(
            crate::model::SensorKind::Screen,
            &[],
        ));
    }
    let episodes = unlock_episodes(day);
    let durations: Vec<f64> = episodes
        .iter()
        .map(|(s, e)| (e - s) as f64 / 1000.0)
        .collect();
    let unlock_times: Vec<i64> = day
        .events
        .iter()
        .filter(|e| {
            matches!(
                e.payload,
                Payload::Screen {
                    state: ScreenState::Unlock
                }
            )
        })
        .map(|e| e.timestamp_ms)
        .collect();

    let mut f = FeatureMap::with_data();
    f.set("screen_unlock_episode_count", episodes.len() as f64);
    f.set("screen_unlock_duration_total", durations.iter().sum());
    if durations.is_empty() {
        for n in [
            "screen_unlock_duration_avg",
            "screen_unlock_duration_min",
            "screen_unlock_duration_max",
            "screen_unlock_duration_std",
        ] {
            f.set_missing(n);
        }
    } else {
        f.set("screen_unlock_duration_avg", stats::mean(&durations));
        f.set("screen_unlock_duration_min", stats::min(&durations));
        f.set("screen_unlock_duration_max", stats::max(&durations));
        f.set("screen_unlock_duration_std", stats::pop_std(&durations));
    }

    match (unlock_times.first(), unlock_times.last()) {
        (Some(&first), Some(&last)) => {
            f.set(
                "screen_first_unlock_after_midnight",
                day.window.minutes_after_midnight(first),
            );
            f.set(
                "screen_last_unlock_time",
                day.window.minutes_after_midnight(last),
            );
        }
        _ => {
            f.set_missing("screen_first_unlock_after_midnight");
            f.set_missing("screen_last_unlock_time");
        }
    }
    let night = unlock_times
        .iter()
        .filter(|&&t| day.window.minutes_after_midnight(t) < NIGHT_END_MINUTES)
        .count();
    f.set("screen_night_unlock_count", night as f64);

    let gaps: Vec<f64> = episodes
        .windows(2)
        .map(|p| (p[1].0 - p[0].1) as f64 / 1000.0)
        .collect();
    if gaps.is_empty() {
        f.set_missing("screen_time_between_unlocks_avg");
        f.set_missing("screen_time_between_unlocks_std");
    } else {
        f.set("screen_time_between_unlocks_avg", stats::mean(&gaps));
        f.set("screen_time_between_unlocks_std", stats::pop_std(&gaps));
    }
    f
}
