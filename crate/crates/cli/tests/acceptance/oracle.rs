//! Brute-force reference implementations of every daily extractor, plus a
//! random participant-day generator per sensor.
//!
//! State sensors are swept second by second; interval sensors use explicit
//! overlap arithmetic; tallies are recounted pairwise.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, Timelike};
use chrono_tz::Tz;
use lonesense_core::features::{
    extract_sensor, sensor_features, DaySlice, DayWindow, ExtractParams,
};
use lonesense_core::model::{
    CallDirection, ChargeState, ContactToken, MessageDirection, Payload, ScreenState, SensorEvent,
    SensorKind,
};
use lonesense_core::Zone;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

const ZONES: [&str; 3] = ["UTC", "Australia/Melbourne", "America/New_York"];

/// Days whose local length is 23 or 25 hours.
fn transition_dates(zone: &str) -> Vec<NaiveDate> {
    let d = |m, day| NaiveDate::from_ymd_opt(2024, m, day).unwrap();
    match zone {
        "Australia/Melbourne" => vec![d(4, 7), d(10, 6)],
        "America/New_York" => vec![d(3, 10), d(11, 3)],
        _ => vec![d(2, 29), d(12, 31)],
    }
}

pub struct Day {
    pub window: DayWindow,
    pub tz: Tz,
    pub prior: Option<SensorEvent>,
    pub events: Vec<SensorEvent>,
}

impl Day {
    fn secs(&self) -> i64 {
        (self.window.end_ms - self.window.start_ms) / 1000
    }

    fn at(&self, sec: i64) -> i64 {
        self.window.start_ms + sec * 1000
    }
}

fn ev(ts: i64, payload: Payload) -> SensorEvent {
    SensorEvent {
        participant_id: "P001".into(),
        timestamp_ms: ts,
        payload,
    }
}

fn random_window(rng: &mut ChaCha8Rng) -> (DayWindow, Tz) {
    let name = ZONES[rng.random_range(0..ZONES.len())];
    let date = if rng.random_bool(0.25) {
        let ds = transition_dates(name);
        ds[rng.random_range(0..ds.len())]
    } else {
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap() + chrono::Days::new(rng.random_range(0..366))
    };
    let zone: Zone = name.parse().unwrap();
    (DayWindow::new(date, zone), name.parse().unwrap())
}

fn event_count(rng: &mut ChaCha8Rng) -> usize {
    match rng.random_range(0..100) {
        0..=4 => 0,
        5..=9 => 1,
        _ => rng.random_range(2..=50),
    }
}

/// `n` distinct whole seconds of the day, ascending.
fn distinct_seconds(rng: &mut ChaCha8Rng, secs: i64, n: usize) -> Vec<i64> {
    let mut v: Vec<i64> = sample(rng, secs as usize, n)
        .into_iter()
        .map(|i| i as i64)
        .collect();
    v.sort_unstable();
    v
}

fn new_day(rng: &mut ChaCha8Rng) -> Day {
    let (window, tz) = random_window(rng);
    Day {
        window,
        tz,
        prior: None,
        events: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Generators

fn screen_state(rng: &mut ChaCha8Rng) -> ScreenState {
    match rng.random_range(0..10) {
        0..=3 => ScreenState::Unlock,
        4..=6 => ScreenState::Lock,
        7 => ScreenState::Off,
        _ => ScreenState::On,
    }
}

fn charge_state(rng: &mut ChaCha8Rng) -> ChargeState {
    if rng.random_bool(0.5) {
        ChargeState::Charging
    } else {
        ChargeState::Discharging
    }
}

fn contact(rng: &mut ChaCha8Rng) -> ContactToken {
    ContactToken(format!("c{}", rng.random_range(0..6)))
}

/// Packages with the category they must land in.
const APPS: [(&str, &str); 9] = [
    ("com.facebook.katana", "social"),
    ("com.tinder", "dating"),
    ("com.spotify.music", "entertainment"),
    ("com.whatsapp", "communication"),
    ("com.microsoft.teams", "productivity"),
    ("com.king.candycrushsaga", "games"),
    ("com.duolingo", "education"),
    ("org.example.notes", "other"),
    ("net.unknown.tool", "other"),
];

pub fn generate(sensor: SensorKind, rng: &mut ChaCha8Rng) -> Day {
    let mut day = new_day(rng);
    let n = event_count(rng);
    let secs = day.secs();
    match sensor {
        SensorKind::Screen => {
            if rng.random_bool(0.6) {
                let back = rng.random_range(1..3600);
                day.prior = Some(ev(
                    day.at(-back),
                    Payload::Screen {
                        state: screen_state(rng),
                    },
                ));
            }
            for s in distinct_seconds(rng, secs, n) {
                let state = screen_state(rng);
                day.events.push(ev(day.at(s), Payload::Screen { state }));
            }
        }
        SensorKind::Battery => {
            let mut state = charge_state(rng);
            if rng.random_bool(0.7) {
                let back = rng.random_range(1..7200);
                day.prior = Some(ev(day.at(-back), Payload::Battery { level: 50.0, state }));
            }
            for s in distinct_seconds(rng, secs, n) {
                if rng.random_bool(0.4) {
                    state = charge_state(rng);
                }
                let level = rng.random_range(0..=1000) as f64 / 10.0;
                day.events
                    .push(ev(day.at(s), Payload::Battery { level, state }));
            }
        }
        SensorKind::Keyboard => {
            let mut times = Vec::new();
            let bursts = rng.random_range(1..=6);
            for b in 0..bursts {
                let mut t = rng.random_range(0..(secs - 600)) * 1000 + rng.random_range(0..1000);
                let share = n / bursts + usize::from(b < n % bursts);
                for _ in 0..share {
                    times.push(t);
                    t += match rng.random_range(0..10) {
                        0 => 5000,
                        1 => rng.random_range(5001..20_000),
                        2 => 0,
                        _ => rng.random_range(50..3000),
                    };
                }
            }
            times.retain(|&t| t < secs * 1000);
            times.sort_unstable();
            for t in times {
                let text_delta = rng.random_range(-3..=8);
                day.events.push(ev(
                    day.window.start_ms + t,
                    Payload::Keyboard { text_delta },
                ));
            }
        }
        SensorKind::Calls => {
            let mut ts: Vec<i64> = (0..n)
                .map(|_| {
                    if rng.random_bool(0.15) {
                        secs - rng.random_range(1..=600)
                    } else {
                        rng.random_range(0..secs)
                    }
                })
                .collect();
            ts.sort_unstable();
            for s in ts {
                let direction = match rng.random_range(0..5) {
                    0 | 1 => CallDirection::Incoming,
                    2 | 3 => CallDirection::Outgoing,
                    _ => CallDirection::Missed,
                };
                let dur_ms: i64 = if rng.random_bool(0.15) {
                    0
                } else {
                    rng.random_range(1000..3_600_000)
                };
                day.events.push(ev(
                    day.at(s),
                    Payload::Calls {
                        direction,
                        duration_s: dur_ms as f64 / 1000.0,
                        contact: contact(rng),
                    },
                ));
            }
        }
        SensorKind::Messages => {
            let mut ts: Vec<i64> = (0..n).map(|_| rng.random_range(0..secs)).collect();
            ts.sort_unstable();
            for s in ts {
                let direction = if rng.random_bool(0.5) {
                    MessageDirection::Sent
                } else {
                    MessageDirection::Received
                };
                day.events.push(ev(
                    day.at(s),
                    Payload::Messages {
                        direction,
                        contact: contact(rng),
                    },
                ));
            }
        }
        SensorKind::Applications => {
            let pkg = |rng: &mut ChaCha8Rng| APPS[rng.random_range(0..APPS.len())].0.to_string();
            if rng.random_bool(0.5) {
                let s = day.at(-rng.random_range(1..7200));
                let end_ms = s + rng.random_range(0..4 * 3_600_000);
                day.prior = Some(ev(
                    s,
                    Payload::Applications {
                        package: pkg(rng),
                        end_ms,
                    },
                ));
            }
            let mut ts: Vec<i64> = (0..n).map(|_| rng.random_range(0..secs)).collect();
            ts.sort_unstable();
            for s in ts {
                let dur = if rng.random_bool(0.1) {
                    0
                } else {
                    rng.random_range(1000..2 * 3_600_000)
                };
                let start = day.at(s);
                day.events.push(ev(
                    start,
                    Payload::Applications {
                        package: pkg(rng),
                        end_ms: start + dur,
                    },
                ));
            }
        }
        SensorKind::Locations => {
            let places = [
                (-37.8000, 144.9600),
                (-37.8030, 144.9630),
                (-37.7970, 144.9580),
            ];
            let mut here = rng.random_range(0..places.len());
            let mut t = rng.random_range(0..4 * 3600);
            for _ in 0..n {
                if t >= secs {
                    break;
                }
                if rng.random_bool(0.25) {
                    here = rng.random_range(0..places.len());
                }
                let (lat0, lon0) = places[here];
                let latitude = lat0 + rng.random_range(-0.0004..0.0004);
                let longitude = lon0 + rng.random_range(-0.0004..0.0004);
                let speed = match rng.random_range(0..10) {
                    0..=4 => None,
                    5..=7 => Some(0.0),
                    _ => Some(rng.random_range(0.0..15.0)),
                };
                day.events.push(ev(
                    day.at(t),
                    Payload::Locations {
                        latitude,
                        longitude,
                        speed,
                    },
                ));
                t += if rng.random_bool(0.05) {
                    0
                } else {
                    rng.random_range(30..2400)
                };
            }
        }
    }
    day
}

// ---------------------------------------------------------------------------
// Oracles

#[derive(Debug, Default)]
pub struct Expect {
    pub values: BTreeMap<String, f64>,
    pub missing: BTreeSet<String>,
    pub has_data: bool,
}

impl Expect {
    fn data() -> Self {
        Self {
            has_data: true,
            ..Default::default()
        }
    }

    fn empty(sensor: SensorKind, params: &ExtractParams) -> Self {
        let mut e = Self::default();
        for d in sensor_features(sensor, &params.app_categories) {
            e.values.insert(d.name.clone(), 0.0);
            e.missing.insert(d.name);
        }
        e
    }

    fn set(&mut self, name: &str, v: f64) {
        self.values.insert(name.into(), v);
    }

    fn miss(&mut self, name: &str) {
        self.values.insert(name.into(), 0.0);
        self.missing.insert(name.into());
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_two_pass(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn local_minutes(tz: Tz, ts: i64) -> f64 {
    let t = DateTime::from_timestamp_millis(ts)
        .unwrap()
        .with_timezone(&tz);
    (t.hour() * 60 + t.minute()) as f64 + t.second() as f64 / 60.0
}

/// Maximal runs of equal `Some` values as `(start, len, value)`.
fn runs<T: Copy + PartialEq>(cells: &[Option<T>]) -> Vec<(usize, usize, T)> {
    let mut out: Vec<(usize, usize, T)> = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if let Some(v) = *c {
            match out.last_mut() {
                Some((s, len, last)) if *last == v && *s + *len == i => *len += 1,
                _ => out.push((i, 1, v)),
            }
        }
    }
    out
}

fn screen_oracle(day: &Day) -> Expect {
    let secs = day.secs() as usize;
    let mut at: BTreeMap<usize, ScreenState> = BTreeMap::new();
    for e in &day.events {
        if let Payload::Screen { state } = e.payload {
            at.insert(
                ((e.timestamp_ms - day.window.start_ms) / 1000) as usize,
                state,
            );
        }
    }
    let mut open = matches!(
        day.prior.as_ref().map(|e| &e.payload),
        Some(Payload::Screen {
            state: ScreenState::Unlock
        })
    );
    let mut cells = vec![None; secs];
    for (s, cell) in cells.iter_mut().enumerate() {
        match at.get(&s) {
            Some(ScreenState::Unlock) => open = true,
            Some(ScreenState::Lock | ScreenState::Off) => open = false,
            _ => {}
        }
        *cell = open.then_some(());
    }
    let eps = runs(&cells);
    let durs: Vec<f64> = eps.iter().map(|r| r.1 as f64).collect();

    let mut x = Expect::data();
    x.set("screen_unlock_episode_count", eps.len() as f64);
    x.set(
        "screen_unlock_duration_total",
        eps.iter().map(|r| r.1).sum::<usize>() as f64,
    );
    if durs.is_empty() {
        for n in ["avg", "min", "max", "std"] {
            x.miss(&format!("screen_unlock_duration_{n}"));
        }
    } else {
        x.set("screen_unlock_duration_avg", mean(&durs));
        x.set(
            "screen_unlock_duration_min",
            eps.iter().map(|r| r.1).min().unwrap() as f64,
        );
        x.set(
            "screen_unlock_duration_max",
            eps.iter().map(|r| r.1).max().unwrap() as f64,
        );
        x.set("screen_unlock_duration_std", std_two_pass(&durs));
    }
    let unlocks: Vec<i64> = day
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
    if unlocks.is_empty() {
        x.miss("screen_first_unlock_after_midnight");
        x.miss("screen_last_unlock_time");
    } else {
        let first = *unlocks.iter().min().unwrap();
        let last = *unlocks.iter().max().unwrap();
        x.set(
            "screen_first_unlock_after_midnight",
            local_minutes(day.tz, first),
        );
        x.set("screen_last_unlock_time", local_minutes(day.tz, last));
    }
    let night = unlocks
        .iter()
        .filter(|&&t| local_minutes(day.tz, t) < 360.0)
        .count();
    x.set("screen_night_unlock_count", night as f64);
    let gaps: Vec<f64> = eps
        .windows(2)
        .map(|p| (p[1].0 - (p[0].0 + p[0].1)) as f64)
        .collect();
    if gaps.is_empty() {
        x.miss("screen_time_between_unlocks_avg");
        x.miss("screen_time_between_unlocks_std");
    } else {
        x.set("screen_time_between_unlocks_avg", mean(&gaps));
        x.set("screen_time_between_unlocks_std", std_two_pass(&gaps));
    }
    x
}

fn battery_oracle(day: &Day) -> Expect {
    let secs = day.secs() as usize;
    let mut at: BTreeMap<usize, ChargeState> = BTreeMap::new();
    let mut levels = Vec::new();
    for e in &day.events {
        if let Payload::Battery { state, level } = e.payload {
            at.insert(
                ((e.timestamp_ms - day.window.start_ms) / 1000) as usize,
                state,
            );
            levels.push(level);
        }
    }
    let mut cur = day.prior.as_ref().and_then(|e| match e.payload {
        Payload::Battery { state, .. } => Some(state),
        _ => None,
    });
    let mut cells = vec![None; secs];
    for (s, cell) in cells.iter_mut().enumerate() {
        if let Some(st) = at.get(&s) {
            cur = Some(*st);
        }
        *cell = cur;
    }
    let eps = runs(&cells);
    let mut x = Expect::data();
    for (state, key) in [
        (ChargeState::Charging, "charge"),
        (ChargeState::Discharging, "discharge"),
    ] {
        let lens: Vec<usize> = eps.iter().filter(|r| r.2 == state).map(|r| r.1).collect();
        let total: usize = lens.iter().sum();
        x.set(&format!("battery_{key}_episode_count"), lens.len() as f64);
        x.set(&format!("battery_{key}_duration_total"), total as f64);
        if lens.is_empty() {
            x.miss(&format!("battery_{key}_duration_avg"));
        } else {
            x.set(
                &format!("battery_{key}_duration_avg"),
                total as f64 / lens.len() as f64,
            );
        }
    }
    x.set("battery_level_mean", mean(&levels));
    x.set(
        "battery_level_min",
        levels.iter().copied().fold(f64::INFINITY, f64::min),
    );
    x
}

fn keyboard_oracle(day: &Day, gap_s: f64) -> Expect {
    let gap_ms = (gap_s * 1000.0) as i64;
    let t: Vec<i64> = day.events.iter().map(|e| e.timestamp_ms).collect();
    let n = t.len();
    // Session id of key i = number of long gaps at or before it.
    let sid: Vec<usize> = (0..n)
        .map(|i| (1..=i).filter(|&j| t[j] - t[j - 1] > gap_ms).count())
        .collect();
    let sessions = sid[n - 1] + 1;
    let spans: Vec<i64> = (0..sessions)
        .map(|s| {
            let members: Vec<i64> = (0..n).filter(|&i| sid[i] == s).map(|i| t[i]).collect();
            members.iter().max().unwrap() - members.iter().min().unwrap()
        })
        .collect();
    let lengths: Vec<f64> = spans.iter().map(|&s| s as f64 / 1000.0).collect();
    let deltas: Vec<i64> = day
        .events
        .iter()
        .map(|e| match e.payload {
            Payload::Keyboard { text_delta } => text_delta,
            _ => unreachable!(),
        })
        .collect();

    let mut x = Expect::data();
    x.set("keyboard_key_press_count", n as f64);
    x.set(
        "keyboard_text_length_change",
        deltas.iter().sum::<i64>() as f64,
    );
    x.set(
        "keyboard_text_added",
        deltas.iter().filter(|&&d| d > 0).sum::<i64>() as f64,
    );
    x.set(
        "keyboard_text_removed",
        -deltas.iter().filter(|&&d| d < 0).sum::<i64>() as f64,
    );
    x.set("keyboard_session_count", sessions as f64);
    x.set("keyboard_session_length_avg", mean(&lengths));
    x.set("keyboard_session_length_total", lengths.iter().sum());
    let within = n - sessions;
    if within == 0 {
        x.miss("keyboard_inter_key_delay_avg");
    } else {
        x.set(
            "keyboard_inter_key_delay_avg",
            spans.iter().sum::<i64>() as f64 / within as f64,
        );
    }
    x
}

/// Distinct values and the highest multiplicity, by pairwise comparison.
fn distinct_and_top<T: PartialEq>(xs: &[T]) -> (usize, usize) {
    let distinct = (0..xs.len())
        .filter(|&i| !(0..i).any(|j| xs[j] == xs[i]))
        .count();
    let top = (0..xs.len())
        .map(|i| xs.iter().filter(|y| **y == xs[i]).count())
        .max()
        .unwrap_or(0);
    (distinct, top)
}

fn calls_oracle(day: &Day) -> Expect {
    let mut x = Expect::data();
    let mut contacts = Vec::new();
    let mut by_dir: BTreeMap<&str, (usize, i64)> = BTreeMap::new();
    let mut connected_ms = Vec::new();
    let mut total_ms = 0i64;
    for e in &day.events {
        let Payload::Calls {
            direction,
            duration_s,
            ref contact,
        } = e.payload
        else {
            unreachable!()
        };
        let dur_ms = (duration_s * 1000.0).round() as i64;
        let d_ms = (e.timestamp_ms + dur_ms).min(day.window.end_ms) - e.timestamp_ms;
        let key = match direction {
            CallDirection::Incoming => "incoming",
            CallDirection::Outgoing => "outgoing",
            CallDirection::Missed => "missed",
        };
        let slot = by_dir.entry(key).or_default();
        slot.0 += 1;
        slot.1 += d_ms;
        total_ms += d_ms;
        if direction != CallDirection::Missed {
            connected_ms.push(d_ms);
        }
        contacts.push(contact.clone());
    }
    let get = |k: &str| by_dir.get(k).copied().unwrap_or((0, 0));
    x.set("calls_incoming_count", get("incoming").0 as f64);
    x.set("calls_outgoing_count", get("outgoing").0 as f64);
    x.set("calls_missed_count", get("missed").0 as f64);
    x.set("calls_incoming_duration", get("incoming").1 as f64 / 1000.0);
    x.set("calls_outgoing_duration", get("outgoing").1 as f64 / 1000.0);
    x.set("calls_total_duration", total_ms as f64 / 1000.0);
    if connected_ms.is_empty() {
        x.miss("calls_average_duration");
        x.miss("calls_max_duration");
    } else {
        let sum: i64 = connected_ms.iter().sum();
        x.set(
            "calls_average_duration",
            sum as f64 / 1000.0 / connected_ms.len() as f64,
        );
        x.set(
            "calls_max_duration",
            *connected_ms.iter().max().unwrap() as f64 / 1000.0,
        );
    }
    let (distinct, top) = distinct_and_top(&contacts);
    x.set("calls_distinct_contacts", distinct as f64);
    x.set("calls_most_frequent_contact_count", top as f64);
    x
}

fn messages_oracle(day: &Day) -> Expect {
    let msgs: Vec<(MessageDirection, ContactToken)> = day
        .events
        .iter()
        .map(|e| match &e.payload {
            Payload::Messages { direction, contact } => (*direction, contact.clone()),
            _ => unreachable!(),
        })
        .collect();
    let of = |d: MessageDirection| -> Vec<ContactToken> {
        msgs.iter()
            .filter(|m| m.0 == d)
            .map(|m| m.1.clone())
            .collect()
    };
    let all: Vec<ContactToken> = msgs.iter().map(|m| m.1.clone()).collect();
    let sent = of(MessageDirection::Sent);
    let recv = of(MessageDirection::Received);
    let (distinct, top) = distinct_and_top(&all);
    let mut x = Expect::data();
    x.set("messages_sent_count", sent.len() as f64);
    x.set("messages_received_count", recv.len() as f64);
    x.set("messages_total_count", msgs.len() as f64);
    x.set("messages_distinct_contacts", distinct as f64);
    x.set(
        "messages_distinct_sent_contacts",
        distinct_and_top(&sent).0 as f64,
    );
    x.set(
        "messages_distinct_received_contacts",
        distinct_and_top(&recv).0 as f64,
    );
    x.set("messages_most_frequent_contact_count", top as f64);
    x
}

fn apps_oracle(day: &Day, params: &ExtractParams) -> Expect {
    let category = |pkg: &str| APPS.iter().find(|a| a.0 == pkg).unwrap().1;
    let mut kept: Vec<(&str, i64)> = Vec::new();
    for e in day.prior.iter().chain(&day.events) {
        let Payload::Applications { package, end_ms } = &e.payload else {
            unreachable!()
        };
        let overlap = (*end_ms).min(day.window.end_ms) - e.timestamp_ms.max(day.window.start_ms);
        if overlap > 0 {
            kept.push((package.as_str(), overlap));
        }
    }
    let mut x = Expect::data();
    x.set(
        "apps_total_duration",
        kept.iter().map(|k| k.1).sum::<i64>() as f64 / 1000.0,
    );
    x.set("apps_episode_count", kept.len() as f64);
    let pkgs: Vec<&str> = kept.iter().map(|k| k.0).collect();
    x.set("apps_distinct_count", distinct_and_top(&pkgs).0 as f64);
    for c in &params.app_categories {
        let mine: Vec<i64> = kept
            .iter()
            .filter(|k| category(k.0) == c)
            .map(|k| k.1)
            .collect();
        x.set(
            &format!("apps_{c}_duration"),
            mine.iter().sum::<i64>() as f64 / 1000.0,
        );
        x.set(&format!("apps_{c}_episode_count"), mine.len() as f64);
    }
    x
}

/// Great-circle distance in the atan2 form.
fn gc_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    const R: f64 = 6_371_000.0;
    let (la1, la2) = (a.0.to_radians(), b.0.to_radians());
    let h = ((la2 - la1) / 2.0).sin().powi(2)
        + la1.cos() * la2.cos() * ((b.1 - a.1).to_radians() / 2.0).sin().powi(2);
    2.0 * R * h.sqrt().atan2((1.0 - h).sqrt())
}

fn locations_oracle(day: &Day, params: &ExtractParams) -> Expect {
    let fixes: Vec<(i64, (f64, f64), Option<f64>)> = day
        .events
        .iter()
        .map(|e| match e.payload {
            Payload::Locations {
                latitude,
                longitude,
                speed,
            } => (e.timestamp_ms, (latitude, longitude), speed),
            _ => unreachable!(),
        })
        .collect();
    if fixes.len() < 2 {
        let mut x = Expect::empty(SensorKind::Locations, params);
        x.has_data = !fixes.is_empty();
        return x;
    }
    let threshold = params.moving_speed_threshold_kmh / 3.6;
    let n = fixes.len();
    let seg = |k: usize| {
        let dt = (fixes[k + 1].0 - fixes[k].0) as f64 / 1000.0;
        let dist = gc_dist(fixes[k].1, fixes[k + 1].1);
        let speed = match fixes[k].2 {
            Some(s) => s,
            None if dt > 0.0 => dist / dt,
            None => 0.0,
        };
        (dt, dist, speed)
    };
    let segs: Vec<(f64, f64, f64)> = (0..n - 1).map(seg).collect();
    let moving: Vec<&(f64, f64, f64)> = segs.iter().filter(|s| s.2 > threshold).collect();
    let moving_t: f64 = moving.iter().map(|s| s.0).sum();
    let moving_d: f64 = moving.iter().map(|s| s.1).sum();
    let static_t: f64 = segs.iter().filter(|s| s.2 <= threshold).map(|s| s.0).sum();

    // Stays: from each anchor, the furthest end whose every step is static and
    // lands within the radius of the anchor.
    let reach = |i: usize, j: usize| {
        (i..j).all(|k| {
            segs[k].2 <= threshold && gc_dist(fixes[i].1, fixes[k + 1].1) <= params.stay_radius_m
        })
    };
    let mut stays = Vec::new();
    let mut i = 0;
    while i + 1 < n {
        let j = (i..n).filter(|&j| reach(i, j)).max().unwrap();
        if j > i && (fixes[j].0 - fixes[i].0) as f64 / 1000.0 >= params.min_stay_s {
            stays.push((i, j));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let mut centres: Vec<(f64, f64)> = Vec::new();
    let mut totals: Vec<f64> = Vec::new();
    for (a, b) in stays {
        let k = (b - a + 1) as f64;
        let c = (
            fixes[a..=b].iter().map(|f| f.1 .0).sum::<f64>() / k,
            fixes[a..=b].iter().map(|f| f.1 .1).sum::<f64>() / k,
        );
        let dwell = (fixes[b].0 - fixes[a].0) as f64 / 1000.0;
        match centres
            .iter()
            .position(|&m| gc_dist(m, c) <= params.stay_radius_m)
        {
            Some(p) => totals[p] += dwell,
            None => {
                centres.push(c);
                totals.push(dwell);
            }
        }
    }
    let total: f64 = totals.iter().sum();
    let h = if total > 0.0 {
        total.ln()
            - totals
                .iter()
                .filter(|&&d| d > 0.0)
                .map(|d| d * d.ln())
                .sum::<f64>()
                / total
    } else {
        0.0
    };

    let mut x = Expect::data();
    x.set(
        "locations_average_speed",
        if moving_t > 0.0 {
            moving_d / moving_t
        } else {
            0.0
        },
    );
    x.set(
        "locations_max_speed",
        segs.iter().map(|s| s.2).fold(0.0, f64::max),
    );
    x.set("locations_moving_time", moving_t);
    x.set("locations_static_time", static_t);
    if static_t > 0.0 {
        x.set("locations_moving_to_static_ratio", moving_t / static_t);
    } else {
        x.set("locations_moving_to_static_ratio", moving_t);
        x.missing.insert("locations_moving_to_static_ratio".into());
    }
    x.set("locations_travel_distance", segs.iter().map(|s| s.1).sum());
    x.set("locations_distinct_clusters", totals.len() as f64);
    x.set("locations_stay_length_std", std_two_pass(&totals));
    x.set(
        "locations_time_at_top_cluster",
        totals.iter().copied().fold(0.0, f64::max),
    );
    x.set("locations_total_stay_time", total);
    x.set("locations_entropy", h);
    x.set(
        "locations_normalized_entropy",
        if totals.len() > 1 {
            h / (totals.len() as f64).ln()
        } else {
            0.0
        },
    );
    x.set("locations_fix_count", n as f64);
    x
}

pub fn oracle(sensor: SensorKind, day: &Day, params: &ExtractParams) -> Expect {
    if day.events.is_empty() && sensor != SensorKind::Locations {
        return Expect::empty(sensor, params);
    }
    match sensor {
        SensorKind::Screen => screen_oracle(day),
        SensorKind::Battery => battery_oracle(day),
        SensorKind::Keyboard => keyboard_oracle(day, params.session_gap_s),
        SensorKind::Calls => calls_oracle(day),
        SensorKind::Messages => messages_oracle(day),
        SensorKind::Applications => apps_oracle(day, params),
        SensorKind::Locations => locations_oracle(day, params),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * b.abs().max(1.0)
}

/// Run the extractor on `day` and diff it against the oracle.
pub fn check(sensor: SensorKind, day: &Day, params: &ExtractParams) -> Result<(), String> {
    let slice = DaySlice {
        window: day.window,
        prior: day.prior.as_ref(),
        events: &day.events,
    };
    let got = extract_sensor(sensor, &slice, params);
    let want = oracle(sensor, day, params);
    if got.has_data != want.has_data {
        return Err(format!("has_data {} vs {}", got.has_data, want.has_data));
    }
    if got.missing != want.missing {
        return Err(format!("missing {:?} vs {:?}", got.missing, want.missing));
    }
    let defs = sensor_features(sensor, &params.app_categories);
    if got.values.len() != defs.len() || want.values.len() != defs.len() {
        return Err(format!(
            "{} values, oracle {}",
            got.values.len(),
            want.values.len()
        ));
    }
    for d in defs {
        let (g, w) = (got.get(&d.name), want.values[&d.name]);
        let ok = if d.unit == "count" {
            g == w
        } else {
            close(g, w)
        };
        if !ok {
            return Err(format!("{}: extractor {g} vs oracle {w}", d.name));
        }
    }
    Ok(())
}
