use super::{sensor_features, DaySlice, FeatureMap};
use crate::model::{Payload, SensorKind};
use crate::stats;

/// Keystroke sessions; a new session starts when the gap exceeds `session_gap_s`.
pub(crate) fn sessions(times: &[i64], session_gap_s: f64) -> Vec<&[i64]> {
    let gap_ms = session_gap_s * 1000.0;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=times.len() {
        if i == times.len() || (times[i] - times[i - 1]) as f64 > gap_ms {
            if start < i {
                out.push(&times[start..i]);
            }
            start = i;
        }
    }
    out
}

pub fn extract_keyboard(day: &DaySlice<'_>, session_gap_s: f64) -> FeatureMap {
    if day.events.is_empty() {
        return FeatureMap::empty(&sensor_features(SensorKind::Keyboard, &[]));
    }
    let mut times = Vec::with_capacity(day.events.len());
    let (mut net, mut added, mut removed) = (0i64, 0i64, 0i64);
    for e in day.events {
        if let Payload::Keyboard { text_delta } = e.payload {
            times.push(e.timestamp_ms);
            net += text_delta;
            if text_delta > 0 {
                added += text_delta;
            } else {
                removed -= text_delta;
            }
        }
    }
    let sess = sessions(&times, session_gap_s);
    let lengths: Vec<f64> = sess
        .iter()
        .map(|s| (s[s.len() - 1] - s[0]) as f64 / 1000.0)
        .collect();
    let delays: Vec<f64> = sess
        .iter()
        .flat_map(|s| s.windows(2).map(|p| (p[1] - p[0]) as f64))
        .collect();

    let mut f = FeatureMap::with_data();
    f.set("keyboard_key_press_count", times.len() as f64);
    f.set("keyboard_text_length_change", net as f64);
    f.set("keyboard_text_added", added as f64);
    f.set("keyboard_text_removed", removed as f64);
    f.set("keyboard_session_count", sess.len() as f64);
    f.set("keyboard_session_length_avg", stats::mean(&lengths));
    f.set("keyboard_session_length_total", lengths.iter().sum());
    if delays.is_empty() {
        f.set_missing("keyboard_inter_key_delay_avg");
    } else {
        f.set("keyboard_inter_key_delay_avg", stats::mean(&delays));
    }
    f
}
