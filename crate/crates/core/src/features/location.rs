//! Mobility features from location fixes: speed, travel distance, stay clusters
//! and the entropy of time spent across them.

use super::{sensor_features, DaySlice, ExtractParams, FeatureMap};
use crate::model::{Payload, SensorKind};
use crate::stats;

const EARTH_RADIUS_M: f64 = 6_371_000.0;

pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Fix {
    pub t_ms: i64,
    pub lat: f64,
    pub lon: f64,
    pub speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StayCluster {
    pub centroid_lat: f64,
    pub centroid_lon: f64,
    /// Indices into the day's fixes.
    pub members: Vec<usize>,
    pub total_stay_s: f64,
    pub visits: usize,
}

/// Segment `i -> i+1` summary.
struct Segment {
    dt_s: f64,
    dist_m: f64,
    speed: f64,
}

fn segments(fixes: &[Fix]) -> Vec<Segment> {
    fixes
        .windows(2)
        .map(|p| {
            let dt_s = (p[1].t_ms - p[0].t_ms) as f64 / 1000.0;
            let dist_m = haversine_m(p[0].lat, p[0].lon, p[1].lat, p[1].lon);
            let speed = p[0]
                .speed
                .unwrap_or(if dt_s > 0.0 { dist_m / dt_s } else { 0.0 });
            Segment {
                dt_s,
                dist_m,
                speed,
            }
        })
        .collect()
}

/// Greedy stay detection followed by greedy radius clustering of the stays.
///
/// A stay is a run of fixes joined by static segments that all lie within
/// `stay_radius_m` of the run's first fix and that lasts at least `min_stay_s`.
/// Each stay joins the first existing cluster whose centre is within the radius,
/// otherwise it opens a new cluster centred on the stay's centroid.
pub(crate) fn stay_clusters_of(fixes: &[Fix], params: &ExtractParams) -> Vec<StayCluster> {
    let threshold = params.moving_speed_threshold_kmh / 3.6;
    let segs = segments(fixes);
    let mut stays: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i + 1 < fixes.len() {
        let anchor = fixes[i];
        let mut j = i;
        while j + 1 < fixes.len()
            && segs[j].speed <= threshold
            && haversine_m(anchor.lat, anchor.lon, fixes[j + 1].lat, fixes[j + 1].lon)
                <= params.stay_radius_m
        {
            j += 1;
        }
        let dwell_s = (fixes[j].t_ms - anchor.t_ms) as f64 / 1000.0;
        if j > i && dwell_s >= params.min_stay_s {
            stays.push((i, j));
            i = j + 1;
        } else {
            i += 1;
        }
    }

    let mut clusters: Vec<StayCluster> = Vec::new();
    for (a, b) in stays {
        let n = (b - a + 1) as f64;
        let lat = fixes[a..=b].iter().map(|f| f.lat).sum::<f64>() / n;
        let lon = fixes[a..=b].iter().map(|f| f.lon).sum::<f64>() / n;
        let dwell = (fixes[b].t_ms - fixes[a].t_ms) as f64 / 1000.0;
        match clusters
            .iter_mut()
            .find(|c| haversine_m(c.centroid_lat, c.centroid_lon, lat, lon) <= params.stay_radius_m)
        {
            Some(c) => {
                c.members.extend(a..=b);
                c.total_stay_s += dwell;
                c.visits += 1;
            }
            None => clusters.push(StayCluster {
                centroid_lat: lat,
                centroid_lon: lon,
                members: (a..=b).collect(),
                total_stay_s: dwell,
                visits: 1,
            }),
        }
    }
    clusters
}

fn fixes_of(day: &DaySlice<'_>) -> Vec<Fix> {
    day.events
        .iter()
        .filter_map(|e| match e.payload {
            Payload::Locations {
                latitude,
                longitude,
                speed,
            } => Some(Fix {
                t_ms: e.timestamp_ms,
                lat: latitude,
                lon: longitude,
                speed,
            }),
            _ => None,
        })
        .collect()
}

/// Stay clusters of one participant-day.
pub fn stay_clusters(day: &DaySlice<'_>, params: &ExtractParams) -> Vec<StayCluster> {
    stay_clusters_of(&fixes_of(day), params)
}

/// Shannon entropy (nats) of the time shares across clusters.
pub(crate) fn entropy(durations: &[f64]) -> f64 {
    let total: f64 = durations.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -durations
        .iter()
        .filter(|&&d| d > 0.0)
        .map(|d| {
            let p = d / total;
            p * p.ln()
        })
        .sum::<f64>()
}

pub fn extract_locations(day: &DaySlice<'_>, params: &ExtractParams) -> FeatureMap {
    let fixes = fixes_of(day);
    if fixes.len() < 2 {
        let mut f = FeatureMap::empty(&sensor_features(SensorKind::Locations, &[]));
        f.has_data = !day.events.is_empty();
        return f;
    }
    let threshold = params.moving_speed_threshold_kmh / 3.6;
    let segs = segments(&fixes);
    let (mut moving_t, mut static_t, mut moving_d, mut travel, mut max_speed) =
        (0.0, 0.0, 0.0, 0.0, 0.0f64);
    for s in &segs {
        travel += s.dist_m;
        max_speed = max_speed.max(s.speed);
        if s.speed > threshold {
            moving_t += s.dt_s;
            moving_d += s.dist_m;
        } else {
            static_t += s.dt_s;
        }
    }

    let clusters = stay_clusters_of(&fixes, params);
    let durations: Vec<f64> = clusters.iter().map(|c| c.total_stay_s).collect();
    let h = entropy(&durations);

    let mut f = FeatureMap::with_data();
    f.set(
        "locations_average_speed",
        if moving_t > 0.0 {
            moving_d / moving_t
        } else {
            0.0
        },
    );
    f.set("locations_max_speed", max_speed);
    f.set("locations_moving_time", moving_t);
    f.set("locations_static_time", static_t);
    if static_t > 0.0 {
        f.set("locations_moving_to_static_ratio", moving_t / static_t);
    } else {
        // Ratio against a one-second floor; flagged so consumers can tell.
        f.set("locations_moving_to_static_ratio", moving_t);
        f.missing.insert("locations_moving_to_static_ratio".into());
    }
    f.set("locations_travel_distance", travel);
    f.set("locations_distinct_clusters", clusters.len() as f64);
    f.set("locations_stay_length_std", stats::pop_std(&durations));
    f.set("locations_time_at_top_cluster", stats::max(&durations));
    f.set("locations_total_stay_time", durations.iter().sum());
    f.set("locations_entropy", h);
    f.set(
        "locations_normalized_entropy",
        if clusters.len() > 1 {
            h / (clusters.len() as f64).ln()
        } else {
            0.0
        },
    );
    f.set("locations_fix_count", fixes.len() as f64);
    f
}
