use std::collections::{BTreeMap, BTreeSet};

use super::{sensor_features, DaySlice, FeatureMap};
use crate::model::{CallDirection, ContactToken, MessageDirection, Payload, SensorKind};
use crate::stats;

fn most_frequent(counts: &BTreeMap<&ContactToken, usize>) -> f64 {
    counts.values().copied().max().unwrap_or(0) as f64
}

/// Call tallies. Durations are truncated at the end of the day.
pub fn extract_calls(day: &DaySlice<'_>) -> FeatureMap {
    if day.events.is_empty() {
        return FeatureMap::empty(&sensor_features(SensorKind::Calls, &[]));
    }
    let (mut inc, mut out, mut missed) = (0usize, 0usize, 0usize);
    let (mut inc_d, mut out_d, mut total_d) = (0.0, 0.0, 0.0);
    let mut connected = Vec::new();
    let mut per_contact: BTreeMap<&ContactToken, usize> = BTreeMap::new();
    for e in day.events {
        let Payload::Calls {
            direction,
            duration_s,
            ref contact,
        } = e.payload
        else {
            continue;
        };
        let remaining = (day.window.end_ms - e.timestamp_ms) as f64 / 1000.0;
        let d = duration_s.min(remaining);
        *per_contact.entry(contact).or_default() += 1;
        total_d += d;
        match direction {
            CallDirection::Incoming => {
                inc += 1;
                inc_d += d;
                connected.push(d);
            }
            CallDirection::Outgoing => {
                out += 1;
                out_d += d;
                connected.push(d);
            }
            CallDirection::Missed => missed += 1,
        }
    }

    let mut f = FeatureMap::with_data();
    f.set("calls_incoming_count", inc as f64);
    f.set("calls_outgoing_count", out as f64);
    f.set("calls_missed_count", missed as f64);
    f.set("calls_incoming_duration", inc_d);
    f.set("calls_outgoing_duration", out_d);
    f.set("calls_total_duration", total_d);
    if connected.is_empty() {
        f.set_missing("calls_average_duration");
        f.set_missing("calls_max_duration");
    } else {
        f.set("calls_average_duration", stats::mean(&connected));
        f.set("calls_max_duration", stats::max(&connected));
    }
    f.set("calls_distinct_contacts", per_contact.len() as f64);
    f.set(
        "calls_most_frequent_contact_count",
        most_frequent(&per_contact),
    );
    f
}

pub fn extract_messages(day: &DaySlice<'_>) -> FeatureMap {
    if day.events.is_empty() {
        return FeatureMap::empty(&sensor_features(SensorKind::Messages, &[]));
    }
    let (mut sent, mut received) = (0usize, 0usize);
    let mut per_contact: BTreeMap<&ContactToken, usize> = BTreeMap::new();
    let mut sent_to = BTreeSet::new();
    let mut received_from = BTreeSet::new();
    for e in day.events {
        let Payload::Messages {
            direction,
            ref contact,
        } = e.payload
        else {
            continue;
        };
        *per_contact.entry(contact).or_default() += 1;
        match direction {
            MessageDirection::Sent => {
                sent += 1;
                sent_to.insert(contact);
            }
            MessageDirection::Received => {
                received += 1;
                received_from.insert(contact);
            }
        }
    }
    let mut f = FeatureMap::with_data();
    f.set("messages_sent_count", sent as f64);
    f.set("messages_received_count", received as f64);
    f.set("messages_total_count", (sent + received) as f64);
    f.set("messages_distinct_contacts", per_contact.len() as f64);
    f.set("messages_distinct_sent_contacts", sent_to.len() as f64);
    f.set(
        "messages_distinct_received_contacts",
        received_from.len() as f64,
    );
    f.set(
        "messages_most_frequent_contact_count",
        most_frequent(&per_contact),
    );
    f
}
