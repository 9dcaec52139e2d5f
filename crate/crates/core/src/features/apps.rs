use std::collections::{BTreeMap, BTreeSet};

use super::{sensor_features, DaySlice, ExtractParams, FeatureMap};
use crate::model::{Payload, SensorEvent, SensorKind};

/// Foreground episodes clipped to the day as `(package, start_ms, end_ms)`.
///
/// An episode that started before midnight contributes its post-midnight part.
pub(crate) fn clipped_episodes<'a>(day: &DaySlice<'a>) -> Vec<(&'a str, i64, i64)> {
    let w = &day.window;
    let clip = |e: &'a SensorEvent| match &e.payload {
        Payload::Applications { package, end_ms } => {
            let s = e.timestamp_ms.max(w.start_ms);
            let t = (*end_ms).min(w.end_ms);
            (t > s).then_some((package.as_str(), s, t))
        }
        _ => None,
    };
    day.prior
        .into_iter()
        .chain(day.events.iter())
        .filter_map(clip)
        .collect()
}

pub fn extract_applications(day: &DaySlice<'_>, params: &ExtractParams) -> FeatureMap {
    if day.events.is_empty() {
        return FeatureMap::empty(&sensor_features(
            SensorKind::Applications,
            &params.app_categories,
        ));
    }
    let episodes = clipped_episodes(day);
    let mut per_cat: BTreeMap<&str, (f64, usize)> = params
        .app_categories
        .iter()
        .map(|c| (c.as_str(), (0.0, 0)))
        .collect();
    let mut total = 0.0;
    let mut distinct = BTreeSet::new();
    for (pkg, s, e) in &episodes {
        let d = (e - s) as f64 / 1000.0;
        total += d;
        distinct.insert(*pkg);
        if let Some(slot) = per_cat.get_mut(params.category_of(pkg)) {
            slot.0 += d;
            slot.1 += 1;
        }
    }
    let mut f = FeatureMap::with_data();
    f.set("apps_total_duration", total);
    f.set("apps_episode_count", episodes.len() as f64);
    f.set("apps_distinct_count", distinct.len() as f64);
    for (c, (d, n)) in per_cat {
        f.set(&format!("apps_{c}_duration"), d);
        f.set(&format!("apps_{c}_episode_count"), n as f64);
    }
    f
}
