//! Synthetic cohorts with planted behavior/loneliness couplings.
//!
//! Each participant has a latent loneliness level per stage. Item responses and
//! a handful of behavioral families (screen time, late-night use, location
//! transitions, stay-length spread) are driven by it; everything else is filler.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    column_name, write_assessments, DatasetError, FlatDataset, Target, WINDOW_DAYS,
};
use crate::features::ExtractParams;
use crate::ingest::{write_log, IngestError, LogFormat, Roster};
use crate::model::{
    is_reverse_item, AssessmentPoint, CallDirection, ChargeState, ContactToken, MessageDirection,
    Payload, ScreenState, SensorEvent, SensorKind, Stage, Uls8Record, ITEM_COUNT,
};
use crate::time::Zone;

const HOUR_MS: i64 = 3_600_000;
const MINUTE_MS: i64 = 60_000;
const HOME_LAT: f64 = -37.8136;
const HOME_LON: f64 = 144.9631;
/// About 1.1 km of latitude between consecutive places.
const PLACE_SPACING_DEG: f64 = 0.01;
const TRAVEL_MS: i64 = 15 * MINUTE_MS;
const MAX_VISITS: usize = 8;
const PACKAGES: [&str; 8] = [
    "com.instagram.android",
    "com.whatsapp",
    "com.google.android.youtube",
    "com.spotify.music",
    "com.google.android.gm",
    "com.duolingo",
    "com.king.candycrushsaga",
    "com.example.notes",
];

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid cohort spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectFamily {
    /// Daily unlocked time and unlock count.
    ScreenUsage,
    /// Unlocks between midnight and 06:00.
    LateNightUsage,
    /// Number of distinct places visited.
    LocationTransitions,
    /// Share of the day spent at home, which drives stay-length spread.
    StayLengthStd,
}

impl EffectFamily {
    pub const ALL: [EffectFamily; 4] = [
        EffectFamily::ScreenUsage,
        EffectFamily::LateNightUsage,
        EffectFamily::LocationTransitions,
        EffectFamily::StayLengthStd,
    ];

    /// Feature whose daily value this family moves most directly.
    pub fn feature(self) -> &'static str {
        match self {
            EffectFamily::ScreenUsage => "screen_unlock_duration_total",
            EffectFamily::LateNightUsage => "screen_night_unlock_count",
            EffectFamily::LocationTransitions => "locations_distinct_clusters",
            EffectFamily::StayLengthStd => "locations_stay_length_std",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub direction: Direction,
    /// 1 spans the full behavioral range over the loneliness scale; 0 removes the coupling.
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub n_participants: usize,
    pub seed: u64,
    pub zone: Zone,
    pub start_date: NaiveDate,
    /// Days after `start_date` of each administration.
    pub midterm_offset_days: u32,
    pub end_offset_days: u32,
    /// Latent loneliness is uniform on `[latent_min, latent_max]`.
    pub latent_min: f64,
    pub latent_max: f64,
    /// End-of-semester latent is the midterm latent plus uniform noise of this half-width.
    pub stage_drift: f64,
    pub effects: BTreeMap<EffectFamily, Effect>,
    /// Std of the per-item response noise, in response units.
    pub item_noise: f64,
    /// Std of the log-scale day-to-day variation of planted behaviors.
    pub behavior_noise: f64,
    pub missing_day_prob: f64,
    /// Per-participant override of `missing_day_prob`.
    pub missing_overrides: BTreeMap<String, f64>,
}

impl Default for CohortSpec {
    fn default() -> Self {
        let effects = [
            (EffectFamily::ScreenUsage, Direction::Up),
            (EffectFamily::LateNightUsage, Direction::Up),
            (EffectFamily::LocationTransitions, Direction::Down),
            (EffectFamily::StayLengthStd, Direction::Up),
        ]
        .into_iter()
        .map(|(f, direction)| {
            (
                f,
                Effect {
                    direction,
                    strength: 1.0,
                },
            )
        })
        .collect();
        Self {
            n_participants: 40,
            seed: 7,
            zone: "Australia/Melbourne".parse().expect("known zone"),
            start_date: NaiveDate::from_ymd_opt(2024, 2, 26).expect("valid date"),
            midterm_offset_days: 49,
            end_offset_days: 105,
            latent_min: 8.0,
            latent_max: 32.0,
            stage_drift: 2.0,
            effects,
            item_noise: 0.35,
            behavior_noise: 0.25,
            missing_day_prob: 0.05,
            missing_overrides: BTreeMap::new(),
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Spec(m));
        if self.n_participants == 0 {
            return bad("n_participants must be at least 1".into());
        }
        if !(8.0..=32.0).contains(&self.latent_min)
            || !(8.0..=32.0).contains(&self.latent_max)
            || self.latent_min > self.latent_max
        {
            return bad("latent range must lie within [8, 32]".into());
        }
        if (self.midterm_offset_days as usize) < WINDOW_DAYS
            || self.end_offset_days < self.midterm_offset_days + WINDOW_DAYS as u32
        {
            return bad("administrations must leave room for two disjoint 14-day windows".into());
        }
        for (name, v) in [
            ("stage_drift", self.stage_drift),
            ("item_noise", self.item_noise),
            ("behavior_noise", self.behavior_noise),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        for (f, e) in &self.effects {
            if !e.strength.is_finite() || e.strength < 0.0 {
                return bad(format!("strength of {f:?} must be finite and non-negative"));
            }
        }
        let probs = std::iter::once(("missing_day_prob", self.missing_day_prob)).chain(
            self.missing_overrides
                .values()
                .map(|&p| ("missing_overrides", p)),
        );
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn participant_id(index: usize) -> String {
        format!("P{:03}", index + 1)
    }

    pub fn assessment_date(&self, stage: Stage) -> NaiveDate {
        let off = match stage {
            Stage::Midterm => self.midterm_offset_days,
            Stage::EndOfSemester => self.end_offset_days,
        };
        self.start_date + Duration::days(off as i64)
    }

    fn effect(&self, family: EffectFamily) -> Effect {
        self.effects.get(&family).copied().unwrap_or(Effect {
            direction: Direction::Up,
            strength: 0.0,
        })
    }
}

/// Latent state of one participant at one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentRow {
    pub participant_id: String,
    pub stage: Stage,
    pub latent: f64,
    pub missing_days: usize,
}

#[derive(Debug, Clone)]
pub struct Cohort {
    pub roster: Roster,
    /// Ordered by participant, then timestamp.
    pub events: Vec<SensorEvent>,
    pub assessments: Vec<AssessmentPoint>,
    pub latent: Vec<LatentRow>,
}

/// Item responses for latent `z` in `[0, 1]`; reverse-worded items are
/// produced on the inverted scale so scored totals track the latent.
pub fn items_from_latent<R: Rng>(z: f64, item_noise: f64, rng: &mut R) -> Uls8Record {
    let raw: Vec<i64> = (1..=ITEM_COUNT)
        .map(|k| {
            let e: f64 = rng.sample(StandardNormal);
            let r = (1.0 + 3.0 * z + item_noise * e).round().clamp(1.0, 4.0) as i64;
            if is_reverse_item(k) {
                5 - r
            } else {
                r
            }
        })
        .collect();
    Uls8Record::new(&raw).expect("responses clamped to 1..=4")
}

/// Split `total` into `parts` non-negative integers summing to `total`.
fn split<R: Rng>(total: i64, parts: usize, rng: &mut R) -> Vec<i64> {
    if parts == 0 {
        return vec![];
    }
    let mut cuts: Vec<i64> = (0..parts - 1)
        .map(|_| rng.random_range(0..=total.max(0)))
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total.max(0) - prev);
    out
}

/// Non-overlapping `(start, end)` episodes inside `[lo, hi)` with the given
/// total length, separated by at least one second.
fn place_episodes<R: Rng>(lo: i64, hi: i64, durations: &[i64], rng: &mut R) -> Vec<(i64, i64)> {
    let n = durations.len() as i64;
    let busy: i64 = durations.iter().sum();
    let slack = (hi - lo) - busy - (n + 1) * 1000;
    let gaps = split(slack.max(0), durations.len() + 1, rng);
    let mut t = lo;
    let mut out = Vec::with_capacity(durations.len());
    for (d, g) in durations.iter().zip(&gaps) {
        t += g + 1000;
        out.push((t, t + d));
        t += d;
    }
    out
}

struct DayPlan<'a> {
    pid: &'a str,
    day_start: i64,
    z: f64,
    contacts: &'a [ContactToken],
}

fn level(spec: &CohortSpec, family: EffectFamily, z: f64) -> f64 {
    let e = spec.effect(family);
    0.5 + e.strength * e.direction.sign() * (z - 0.5)
}

fn day_mult<R: Rng>(spec: &CohortSpec, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(StandardNormal);
    (spec.behavior_noise * e).exp()
}

fn ev(pid: &str, t: i64, payload: Payload) -> SensorEvent {
    SensorEvent {
        participant_id: pid.to_string(),
        timestamp_ms: t,
        payload,
    }
}

fn screen_and_apps<R: Rng>(
    spec: &CohortSpec,
    d: &DayPlan<'_>,
    rng: &mut R,
    out: &mut Vec<SensorEvent>,
) {
    let v = level(spec, EffectFamily::ScreenUsage, d.z).max(0.0);
    let m = day_mult(spec, rng);
    let count = ((15.0 + 25.0 * v) * m).round().clamp(1.0, 200.0) as usize;
    let total_ms = ((3600.0 + 14_400.0 * v) * m * 1000.0).round() as i64;
    let total_ms = total_ms.clamp(count as i64 * 10_000, 12 * HOUR_MS);
    let durations: Vec<i64> = split(total_ms - count as i64 * 10_000, count, rng)
        .into_iter()
        .map(|x| x + 10_000)
        .collect();
    let mut episodes = place_episodes(
        d.day_start + 7 * HOUR_MS,
        d.day_start + 22 * HOUR_MS,
        &durations,
        rng,
    );

    let vn = level(spec, EffectFamily::LateNightUsage, d.z).max(0.0);
    let mn = day_mult(spec, rng);
    let night = (4.0 * vn * mn).round().clamp(0.0, 12.0) as usize;
    let night_durations: Vec<i64> = (0..night)
        .map(|_| rng.random_range(60_000..=300_000))
        .collect();
    let mut night_eps = place_episodes(
        d.day_start + 30 * MINUTE_MS,
        d.day_start + 5 * HOUR_MS,
        &night_durations,
        rng,
    );
    night_eps.append(&mut episodes);
    for (s, e) in night_eps {
        out.push(ev(
            d.pid,
            s,
            Payload::Screen {
                state: ScreenState::Unlock,
            },
        ));
        out.push(ev(
            d.pid,
            e,
            Payload::Screen {
                state: ScreenState::Lock,
            },
        ));
        let package = PACKAGES[rng.random_range(0..PACKAGES.len())].to_string();
        out.push(ev(d.pid, s, Payload::Applications { package, end_ms: e }));
    }
}

fn locations<R: Rng>(
    spec: &CohortSpec,
    d: &DayPlan<'_>,
    home: (f64, f64),
    rng: &mut R,
    out: &mut Vec<SensorEvent>,
) {
    let vt = level(spec, EffectFamily::LocationTransitions, d.z).max(0.0);
    let visits =
        (1.0 + (5.0 * vt * day_mult(spec, rng)).round()).clamp(1.0, MAX_VISITS as f64) as usize;
    let vs = level(spec, EffectFamily::StayLengthStd, d.z).clamp(0.0, 1.0);
    let home_share = (0.3 + 0.6 * vs * day_mult(spec, rng)).clamp(0.1, 0.95);

    let (lo, hi) = (d.day_start + 6 * HOUR_MS, d.day_start + 22 * HOUR_MS);
    let available = (hi - lo) - (visits as i64 + 1) * TRAVEL_MS;
    let home_ms = (available as f64 * home_share) as i64;
    let away_ms = (available - home_ms) / visits as i64;
    // Home in the morning, each place once, home again in the evening.
    let mut stays = vec![(0usize, home_ms / 2)];
    stays.extend((1..=visits).map(|p| (p, away_ms)));
    stays.push((0, home_ms - home_ms / 2));
    let order: Vec<usize> = {
        let mut o: Vec<usize> = (1..=MAX_VISITS).collect();
        for i in (1..o.len()).rev() {
            o.swap(i, rng.random_range(0..=i));
        }
        o
    };
    let coord = |place: usize| {
        if place == 0 {
            home
        } else {
            (home.0 + order[place - 1] as f64 * PLACE_SPACING_DEG, home.1)
        }
    };
    let mut t = lo;
    for (i, &(place, dur)) in stays.iter().enumerate() {
        let (lat, lon) = coord(place);
        let end = t + dur;
        let mut f = t;
        while f < end {
            out.push(ev(
                d.pid,
                f,
                Payload::Locations {
                    latitude: lat,
                    longitude: lon,
                    speed: Some(0.0),
                },
            ));
            f += 10 * MINUTE_MS;
        }
        out.push(ev(
            d.pid,
            end,
            Payload::Locations {
                latitude: lat,
                longitude: lon,
                speed: Some(0.0),
            },
        ));
        t = end;
        if let Some(&(next, _)) = stays.get(i + 1) {
            let (nlat, nlon) = coord(next);
            let mid = t + TRAVEL_MS / 2;
            out.push(ev(
                d.pid,
                mid,
                Payload::Locations {
                    latitude: (lat + nlat) / 2.0,
                    longitude: (lon + nlon) / 2.0,
                    speed: Some(rng.random_range(1.0..15.0)),
                },
            ));
            t += TRAVEL_MS;
        }
    }
}

fn filler<R: Rng>(d: &DayPlan<'_>, rng: &mut R, out: &mut Vec<SensorEvent>) {
    let at = |h: f64| d.day_start + (h * HOUR_MS as f64) as i64;
    for (h, level, state) in [
        (6.5, 90.0, ChargeState::Discharging),
        (12.0, 60.0, ChargeState::Discharging),
        (18.0, 35.0, ChargeState::Charging),
        (19.5, 80.0, ChargeState::Discharging),
        (21.75, 65.0, ChargeState::Discharging),
    ] {
        let level = (level + rng.random_range(-8.0..8.0f64)).round();
        out.push(ev(d.pid, at(h), Payload::Battery { level, state }));
    }

    let sessions = rng.random_range(3..=7);
    for s in 0..sessions {
        let mut t = at(8.0 + 1.5 * s as f64) + rng.random_range(0..30 * MINUTE_MS);
        for _ in 0..rng.random_range(5..=40) {
            let text_delta = if rng.random_bool(0.85) { 1 } else { -1 };
            out.push(ev(d.pid, t, Payload::Keyboard { text_delta }));
            t += rng.random_range(150..2_000);
        }
    }

    // Distinct minutes between 09:00 and 21:00.
    let n_calls = rng.random_range(0..=3);
    for m in sample(rng, 720, n_calls).into_iter() {
        let direction = match rng.random_range(0..3) {
            0 => CallDirection::Incoming,
            1 => CallDirection::Outgoing,
            _ => CallDirection::Missed,
        };
        let duration_s = match direction {
            CallDirection::Missed => 0.0,
            _ => rng.random_range(30..=900) as f64,
        };
        let contact = d.contacts[rng.random_range(0..d.contacts.len())].clone();
        out.push(ev(
            d.pid,
            at(9.0) + m as i64 * MINUTE_MS,
            Payload::Calls {
                direction,
                duration_s,
                contact,
            },
        ));
    }
    let n_msgs = rng.random_range(2..=12);
    for m in sample(rng, 720, n_msgs).into_iter() {
        let direction = if rng.random_bool(0.5) {
            MessageDirection::Sent
        } else {
            MessageDirection::Received
        };
        let contact = d.contacts[rng.random_range(0..d.contacts.len())].clone();
        out.push(ev(
            d.pid,
            at(9.0) + m as i64 * MINUTE_MS + 30_000,
            Payload::Messages { direction, contact },
        ));
    }
}

struct Generated {
    events: Vec<SensorEvent>,
    assessments: Vec<AssessmentPoint>,
    latent: Vec<LatentRow>,
}

fn generate_participant(spec: &CohortSpec, index: usize) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let pid = CohortSpec::participant_id(index);
    let missing_p = spec
        .missing_overrides
        .get(&pid)
        .copied()
        .unwrap_or(spec.missing_day_prob);

    let mid = rng.random_range(spec.latent_min..=spec.latent_max);
    let drift = if spec.stage_drift > 0.0 {
        rng.random_range(-spec.stage_drift..=spec.stage_drift)
    } else {
        0.0
    };
    let end = (mid + drift).clamp(spec.latent_min, spec.latent_max);
    let home = (
        HOME_LAT + rng.random_range(-0.05..0.05),
        HOME_LON + rng.random_range(-0.05..0.05),
    );
    let contacts: Vec<ContactToken> = (0..8)
        .map(|_| ContactToken(format!("{:016x}", rng.random::<u64>())))
        .collect();

    let mut events = Vec::new();
    let mut assessments = Vec::new();
    let mut latent = Vec::new();
    for (stage, l) in [(Stage::Midterm, mid), (Stage::EndOfSemester, end)] {
        let z = (l - 8.0) / 24.0;
        let date = spec.assessment_date(stage);
        let record = items_from_latent(z, spec.item_noise, &mut rng);
        let mut missing = 0;
        for back in (1..=WINDOW_DAYS as i64).rev() {
            let day = date - Duration::days(back);
            // Draws happen regardless of missingness so one participant's
            // missing days do not shift their other days.
            let mut day_rng = ChaCha8Rng::seed_from_u64(rng.random());
            let is_missing = rng.random_bool(missing_p);
            if is_missing {
                missing += 1;
                continue;
            }
            let plan = DayPlan {
                pid: &pid,
                day_start: spec.zone.day_start_ms(day),
                z,
                contacts: &contacts,
            };
            screen_and_apps(spec, &plan, &mut day_rng, &mut events);
            locations(spec, &plan, home, &mut day_rng, &mut events);
            filler(&plan, &mut day_rng, &mut events);
        }
        assessments.push(AssessmentPoint {
            participant_id: pid.clone(),
            stage,
            assessment_date: date,
            record,
        });
        latent.push(LatentRow {
            participant_id: pid.clone(),
            stage,
            latent: l,
            missing_days: missing,
        });
    }
    events.sort_by_key(|e| e.timestamp_ms);
    Generated {
        events,
        assessments,
        latent,
    }
}

/// Deterministic under `spec.seed`; participants are generated in parallel on
/// independent RNG streams.
pub fn generate_cohort(spec: &CohortSpec) -> Result<Cohort, SynthError> {
    spec.validate()?;
    let parts: Vec<Generated> = (0..spec.n_participants)
        .into_par_iter()
        .map(|i| generate_participant(spec, i))
        .collect();
    let mut roster = Roster::new(spec.zone);
    let mut cohort = Cohort {
        roster: Roster::new(spec.zone),
        events: Vec::new(),
        assessments: Vec::new(),
        latent: Vec::new(),
    };
    for (i, g) in parts.into_iter().enumerate() {
        roster.insert(CohortSpec::participant_id(i), spec.zone);
        cohort.events.extend(g.events);
        cohort.assessments.extend(g.assessments);
        cohort.latent.extend(g.latent);
    }
    cohort.roster = roster;
    Ok(cohort)
}

/// Write `roster.csv`, `assessments.csv`, `latent.csv` and one log per sensor.
pub fn write_cohort(
    cohort: &Cohort,
    dir: &Path,
    format: LogFormat,
) -> Result<Vec<PathBuf>, SynthError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let roster = dir.join("roster.csv");
    cohort.roster.write(std::fs::File::create(&roster)?)?;
    written.push(roster);
    let assess = dir.join("assessments.csv");
    write_assessments(std::fs::File::create(&assess)?, &cohort.assessments)?;
    written.push(assess);
    let latent = dir.join("latent.csv");
    {
        let mut w = csv::Writer::from_path(&latent)
            .map_err(|e| SynthError::Dataset(DatasetError::Csv(e)))?;
        let csv_err = |e: csv::Error| SynthError::Dataset(DatasetError::Csv(e));
        w.write_record(["participant_id", "stage", "latent", "missing_days"])
            .map_err(csv_err)?;
        for r in &cohort.latent {
            w.write_record([
                r.participant_id.clone(),
                r.stage.to_string(),
                format!("{:.6}", r.latent),
                r.missing_days.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
    }
    written.push(latent);
    for sensor in SensorKind::ALL {
        let path = dir.join(format!("{}.{}", sensor.slug(), format.extension()));
        write_log(
            std::fs::File::create(&path)?,
            sensor,
            &cohort.events,
            format,
        )?;
        written.push(path);
    }
    Ok(written)
}

/// A flat dataset with known signal columns, for model-recovery checks.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedData {
    pub data: FlatDataset,
    pub signal: Vec<String>,
}

/// `n` participants with ULS-8 totals generated from a uniform latent, and
/// `n_features` window columns of which the first `n_signal` (in
/// [`planted_signal_columns`] order) are the latent plus Gaussian noise of std
/// `noise` (latent rescaled to `[0, 1]`). The rest are pure noise.
/// Columns are in catalog order.
pub fn planted_dataset(
    n: usize,
    n_signal: usize,
    n_features: usize,
    noise: f64,
    seed: u64,
) -> Result<PlantedData, SynthError> {
    let signal_cols = planted_signal_columns();
    if n == 0 || n_signal > signal_cols.len() || n_signal > n_features {
        return Err(SynthError::Spec(format!(
            "need n >= 1 and n_signal <= min({}, n_features)",
            signal_cols.len()
        )));
    }
    if !noise.is_finite() || noise < 0.0 {
        return Err(SynthError::Spec(
            "noise must be finite and non-negative".into(),
        ));
    }
    let signal: Vec<(String, f64)> = signal_cols[..n_signal]
        .iter()
        .map(|(c, d)| (c.clone(), d.sign()))
        .collect();
    let catalog = ExtractParams::default().catalog();
    let mut pool: Vec<String> = catalog
        .iter()
        .flat_map(|f| (1..=WINDOW_DAYS).map(move |d| column_name(&f.name, d)))
        .filter(|c| !signal_cols.iter().any(|(s, _)| s == c))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_noise = n_features - n_signal;
    let picked: Vec<usize> = sample(&mut rng, pool.len(), n_noise).into_vec();
    let mut noise_cols: Vec<String> = picked
        .into_iter()
        .map(|i| std::mem::take(&mut pool[i]))
        .collect();
    let mut columns: Vec<String> = signal.iter().map(|(c, _)| c.clone()).collect();
    columns.append(&mut noise_cols);
    let order = |c: &String| {
        let (feat, day) = crate::dataset::split_column(c).expect("generated name");
        (catalog.position(feat).expect("catalog feature"), day)
    };
    columns.sort_by_key(order);

    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut row_ids = Vec::with_capacity(n);
    for i in 0..n {
        let z: f64 = rng.random();
        let record = items_from_latent(z, 0.35, &mut rng);
        let row: Vec<f64> = columns
            .iter()
            .map(|c| {
                let e: f64 = rng.sample(StandardNormal);
                match signal.iter().find(|(s, _)| s == c) {
                    Some((_, sign)) => sign * z + noise * e,
                    None => e,
                }
            })
            .collect();
        x.push(row);
        y.push(Target::Total.of(&record));
        row_ids.push((CohortSpec::participant_id(i), Stage::EndOfSemester));
    }
    Ok(PlantedData {
        data: FlatDataset {
            columns,
            row_ids,
            x,
            y,
            target: Target::Total,
        },
        signal: signal.into_iter().map(|(c, _)| c).collect(),
    })
}

/// Window columns that [`planted_dataset`] couples to loneliness, with direction.
pub fn planted_signal_columns() -> Vec<(String, Direction)> {
    [
        ("screen_unlock_duration_total", 3, Direction::Up),
        ("locations_distinct_clusters", 8, Direction::Down),
        ("screen_night_unlock_count", 6, Direction::Up),
        ("locations_stay_length_std", 7, Direction::Up),
        ("apps_social_duration", 10, Direction::Up),
        ("calls_outgoing_count", 12, Direction::Down),
    ]
    .into_iter()
    .map(|(f, d, dir)| (column_name(f, d), dir))
    .collect()
}
