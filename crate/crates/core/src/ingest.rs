//! Raw sensor log parsing, validation and time normalization.
//!
//! Canonical delimited layout is one file per sensor with the header
//! `participant_id,timestamp_ms,sensor,<sensor fields>`; json-lines files carry
//! the same keys, one object per line.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    CallDirection, ChargeState, ContactToken, MessageDirection, Payload, ScreenState, SensorEvent,
    SensorKind,
};
use crate::time::{UnknownZone, Zone};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Unreadable { path: PathBuf, source: io::Error },
    #[error("header mismatch for {sensor}: expected `{expected}`, found `{found}`")]
    HeaderMismatch {
        sensor: SensorKind,
        expected: String,
        found: String,
    },
    #[error("log has no header row")]
    MissingHeader,
    #[error(transparent)]
    UnknownSensor(#[from] crate::model::UnknownSensor),
    #[error(transparent)]
    Zone(#[from] UnknownZone),
    #[error("roster row {row}: {reason}")]
    Roster { row: usize, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogFormat {
    Delimited,
    JsonLines,
}

impl LogFormat {
    pub fn extension(self) -> &'static str {
        match self {
            LogFormat::Delimited => "csv",
            LogFormat::JsonLines => "jsonl",
        }
    }
}

/// Participant → time zone, with a fallback for unlisted participants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Roster {
    pub default_zone: Zone,
    zones: BTreeMap<String, Zone>,
}

impl Roster {
    pub fn new(default_zone: Zone) -> Self {
        Self {
            default_zone,
            zones: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, participant: impl Into<String>, zone: Zone) {
        self.zones.insert(participant.into(), zone);
    }

    pub fn zone_for(&self, participant: &str) -> Zone {
        self.zones
            .get(participant)
            .copied()
            .unwrap_or(self.default_zone)
    }

    pub fn contains(&self, participant: &str) -> bool {
        self.zones.contains_key(participant)
    }

    pub fn participants(&self) -> impl Iterator<Item = &str> {
        self.zones.keys().map(String::as_str)
    }

    /// Reads a `participant_id,timezone` file.
    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let file = File::open(path).map_err(|source| IngestError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["participant_id", "timezone"] {
            return Err(IngestError::Roster {
                row: 0,
                reason: "header must be `participant_id,timezone`".into(),
            });
        }
        let mut roster = Roster::default();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let (pid, tz) = (&rec[0], &rec[1]);
            if pid.is_empty() {
                return Err(IngestError::Roster {
                    row: i + 1,
                    reason: "empty participant_id".into(),
                });
            }
            roster.insert(pid, tz.parse::<Zone>()?);
        }
        Ok(roster)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), IngestError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["participant_id", "timezone"])?;
        for (pid, z) in &self.zones {
            wtr.write_record([pid.as_str(), &z.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LogSource {
    pub path: PathBuf,
    pub format: LogFormat,
    pub sensor: SensorKind,
    pub roster: Roster,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based data row (header excluded).
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub events_emitted: usize,
    pub rejects: Vec<Reject>,
    pub per_day_counts: BTreeMap<String, BTreeMap<NaiveDate, usize>>,
}

impl IngestReport {
    pub fn reconciles(&self) -> bool {
        let per_day: usize = self.per_day_counts.values().flat_map(|d| d.values()).sum();
        self.rows_read == self.events_emitted + self.rejects.len() && per_day == self.events_emitted
    }

    fn absorb(&mut self, other: IngestReport) {
        self.rows_read += other.rows_read;
        self.events_emitted += other.events_emitted;
        self.rejects.extend(other.rejects);
        for (pid, days) in other.per_day_counts {
            let slot = self.per_day_counts.entry(pid).or_default();
            for (d, n) in days {
                *slot.entry(d).or_default() += n;
            }
        }
    }
}

/// Column names after `participant_id,timestamp_ms,sensor`.
pub fn sensor_fields(sensor: SensorKind) -> &'static [&'static str] {
    match sensor {
        SensorKind::Screen => &["state"],
        SensorKind::Locations => &["latitude", "longitude", "speed"],
        SensorKind::Battery => &["level", "state"],
        SensorKind::Keyboard => &["text_delta"],
        SensorKind::Calls => &["direction", "duration_s", "contact"],
        SensorKind::Messages => &["direction", "contact"],
        SensorKind::Applications => &["package", "end_ms"],
    }
}

pub fn header_for(sensor: SensorKind) -> Vec<&'static str> {
    let mut h = vec!["participant_id", "timestamp_ms", "sensor"];
    h.extend_from_slice(sensor_fields(sensor));
    h
}

pub fn parse_log(source: &LogSource) -> Result<(Vec<SensorEvent>, IngestReport), IngestError> {
    let file = File::open(&source.path).map_err(|e| IngestError::Unreadable {
        path: source.path.clone(),
        source: e,
    })?;
    parse_reader(
        BufReader::new(file),
        source.format,
        source.sensor,
        &source.roster,
    )
}

/// Parse one sensor log from any reader.
pub fn parse_reader<R: BufRead>(
    reader: R,
    format: LogFormat,
    sensor: SensorKind,
    roster: &Roster,
) -> Result<(Vec<SensorEvent>, IngestReport), IngestError> {
    let rows = match format {
        LogFormat::Delimited => read_delimited(reader, sensor)?,
        LogFormat::JsonLines => read_json_lines(reader, sensor)?,
    };
    let mut report = IngestReport {
        rows_read: rows.len(),
        ..Default::default()
    };
    let mut events = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        match row.and_then(|fields| parse_fields(&fields, sensor)) {
            Ok(ev) => events.push((i + 1, ev)),
            Err(reason) => report.rejects.push(Reject {
                row: i + 1,
                reason: reason.to_string(),
            }),
        }
    }

    events.sort_by(|a, b| {
        (&a.1.participant_id, a.1.timestamp_ms).cmp(&(&b.1.participant_id, b.1.timestamp_ms))
    });
    let events = drop_duplicates(events, &mut report.rejects);
    report.rejects.sort_by_key(|r| r.row);
    report.events_emitted = events.len();
    count_days(&events, roster, &mut report);
    Ok((events, report))
}

/// Removes exact repeats; input must be sorted by (participant, timestamp).
fn drop_duplicates(rows: Vec<(usize, SensorEvent)>, rejects: &mut Vec<Reject>) -> Vec<SensorEvent> {
    let mut out: Vec<SensorEvent> = Vec::with_capacity(rows.len());
    let mut group_start = 0;
    for (row, ev) in rows {
        let same_key = out.last().is_some_and(|p| {
            p.participant_id == ev.participant_id && p.timestamp_ms == ev.timestamp_ms
        });
        if !same_key {
            group_start = out.len();
        }
        if out[group_start..].iter().any(|p| p.payload == ev.payload) {
            rejects.push(Reject {
                row,
                reason: "duplicate".into(),
            });
        } else {
            out.push(ev);
        }
    }
    out
}

fn count_days(events: &[SensorEvent], roster: &Roster, report: &mut IngestReport) {
    for ev in events {
        let date = roster
            .zone_for(&ev.participant_id)
            .localize(ev.timestamp_ms)
            .date;
        *report
            .per_day_counts
            .entry(ev.participant_id.clone())
            .or_default()
            .entry(date)
            .or_default() += 1;
    }
}

type RawRow = Result<Vec<String>, &'static str>;

fn read_delimited<R: Read>(reader: R, sensor: SensorKind) -> Result<Vec<RawRow>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(IngestError::MissingHeader),
    };
    let expected = header_for(sensor);
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != expected {
        return Err(IngestError::HeaderMismatch {
            sensor,
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    let mut rows = Vec::new();
    for rec in records {
        rows.push(match rec {
            Ok(r) if r.len() == expected.len() => {
                Ok(r.iter().map(|s| s.trim().to_string()).collect())
            }
            Ok(_) => Err("columns"),
            Err(_) => Err("encoding"),
        });
    }
    Ok(rows)
}

fn read_json_lines<R: BufRead>(reader: R, sensor: SensorKind) -> Result<Vec<RawRow>, IngestError> {
    let keys = header_for(sensor);
    let mut rows = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = match serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&line) {
            Ok(obj) => keys
                .iter()
                .map(|k| match obj.get(*k) {
                    None | Some(serde_json::Value::Null) => Ok(String::new()),
                    Some(serde_json::Value::String(s)) => Ok(s.trim().to_string()),
                    Some(serde_json::Value::Number(n)) => Ok(n.to_string()),
                    Some(_) => Err("json"),
                })
                .collect(),
            Err(_) => Err("json"),
        };
        rows.push(row);
    }
    Ok(rows)
}

fn parse_fields(f: &[String], sensor: SensorKind) -> Result<SensorEvent, &'static str> {
    let participant_id = f[0].clone();
    if participant_id.is_empty() {
        return Err("participant");
    }
    let timestamp_ms: i64 = f[1].parse().map_err(|_| "timestamp")?;
    if timestamp_ms <= 0 {
        return Err("timestamp");
    }
    match f[2].parse::<SensorKind>() {
        Ok(k) if k == sensor => {}
        _ => return Err("sensor"),
    }
    let v = &f[3..];
    let payload = match sensor {
        SensorKind::Screen => Payload::Screen {
            state: match v[0].to_ascii_lowercase().as_str() {
                "unlock" | "unlocked" => ScreenState::Unlock,
                "lock" | "locked" => ScreenState::Lock,
                "on" => ScreenState::On,
                "off" => ScreenState::Off,
                _ => return Err("state"),
            },
        },
        SensorKind::Locations => {
            let latitude = finite(&v[0])
                .filter(|x| x.abs() <= 90.0)
                .ok_or("latitude")?;
            let longitude = finite(&v[1])
                .filter(|x| x.abs() <= 180.0)
                .ok_or("longitude")?;
            let speed = if v[2].is_empty() {
                None
            } else {
                Some(finite(&v[2]).filter(|x| *x >= 0.0).ok_or("speed")?)
            };
            Payload::Locations {
                latitude,
                longitude,
                speed,
            }
        }
        SensorKind::Battery => Payload::Battery {
            level: finite(&v[0])
                .filter(|x| (0.0..=100.0).contains(x))
                .ok_or("level")?,
            state: match v[1].to_ascii_lowercase().as_str() {
                "charging" | "full" => ChargeState::Charging,
                "discharging" | "unplugged" => ChargeState::Discharging,
                _ => return Err("state"),
            },
        },
        SensorKind::Keyboard => Payload::Keyboard {
            text_delta: v[0].parse().map_err(|_| "text_delta")?,
        },
        SensorKind::Calls => Payload::Calls {
            direction: match v[0].to_ascii_lowercase().as_str() {
                "incoming" => CallDirection::Incoming,
                "outgoing" => CallDirection::Outgoing,
                "missed" => CallDirection::Missed,
                _ => return Err("direction"),
            },
            duration_s: finite(&v[1]).filter(|x| *x >= 0.0).ok_or("duration_s")?,
            contact: token(&v[2])?,
        },
        SensorKind::Messages => Payload::Messages {
            direction: match v[0].to_ascii_lowercase().as_str() {
                "sent" => MessageDirection::Sent,
                "received" => MessageDirection::Received,
                _ => return Err("direction"),
            },
            contact: token(&v[1])?,
        },
        SensorKind::Applications => {
            if v[0].is_empty() {
                return Err("package");
            }
            let end_ms: i64 = v[1].parse().map_err(|_| "end_ms")?;
            if end_ms < timestamp_ms {
                return Err("end_ms");
            }
            Payload::Applications {
                package: v[0].clone(),
                end_ms,
            }
        }
    };
    Ok(SensorEvent {
        participant_id,
        timestamp_ms,
        payload,
    })
}

fn finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn token(s: &str) -> Result<ContactToken, &'static str> {
    if s.is_empty() {
        Err("contact")
    } else {
        Ok(ContactToken(s.to_string()))
    }
}

/// Merged result of several sensor logs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub total: IngestReport,
    pub per_source: BTreeMap<String, IngestReport>,
}

/// Parse many logs (possibly concurrently) and merge into one stream ordered by
/// participant then timestamp, with source order breaking ties.
pub fn ingest_sources(
    sources: &[LogSource],
) -> Result<(Vec<SensorEvent>, IngestSummary), IngestError> {
    let parsed: Vec<_> = sources
        .par_iter()
        .map(parse_log)
        .collect::<Result<_, _>>()?;
    let mut summary = IngestSummary::default();
    let mut all = Vec::new();
    for (src, (events, report)) in sources.iter().zip(parsed) {
        all.extend(events);
        summary
            .per_source
            .insert(src.path.display().to_string(), report.clone());
        summary.total.absorb(report);
    }
    summary.total.rejects.clear();
    for r in summary.per_source.values() {
        summary.total.rejects.extend(r.rejects.iter().cloned());
    }
    all.sort_by(|a, b| {
        (&a.participant_id, a.timestamp_ms).cmp(&(&b.participant_id, b.timestamp_ms))
    });
    Ok((all, summary))
}

/// Discover `<sensor>.csv` / `<sensor>.jsonl` files in a directory.
pub fn discover_sources(dir: &Path, roster: &Roster) -> Vec<LogSource> {
    let mut out = Vec::new();
    for sensor in SensorKind::ALL {
        for format in [LogFormat::Delimited, LogFormat::JsonLines] {
            let path = dir.join(format!("{}.{}", sensor.slug(), format.extension()));
            if path.is_file() {
                out.push(LogSource {
                    path,
                    format,
                    sensor,
                    roster: roster.clone(),
                });
            }
        }
    }
    out
}

fn lower<T: Serialize>(s: &T) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn fields_of(ev: &SensorEvent) -> Vec<String> {
    let mut row = vec![
        ev.participant_id.clone(),
        ev.timestamp_ms.to_string(),
        ev.kind().slug().to_string(),
    ];
    match &ev.payload {
        Payload::Screen { state } => row.push(lower(state)),
        Payload::Locations {
            latitude,
            longitude,
            speed,
        } => {
            row.push(latitude.to_string());
            row.push(longitude.to_string());
            row.push(speed.map(|s| s.to_string()).unwrap_or_default());
        }
        Payload::Battery { level, state } => {
            row.push(level.to_string());
            row.push(lower(state));
        }
        Payload::Keyboard { text_delta } => row.push(text_delta.to_string()),
        Payload::Calls {
            direction,
            duration_s,
            contact,
        } => {
            row.push(lower(direction));
            row.push(duration_s.to_string());
            row.push(contact.0.clone());
        }
        Payload::Messages { direction, contact } => {
            row.push(lower(direction));
            row.push(contact.0.clone());
        }
        Payload::Applications { package, end_ms } => {
            row.push(package.clone());
            row.push(end_ms.to_string());
        }
    }
    row
}

/// Write events of a single sensor in the canonical file format.
pub fn write_log<W: Write>(
    w: W,
    sensor: SensorKind,
    events: &[SensorEvent],
    format: LogFormat,
) -> Result<(), IngestError> {
    let header = header_for(sensor);
    match format {
        LogFormat::Delimited => {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(&header)?;
            for ev in events.iter().filter(|e| e.kind() == sensor) {
                wtr.write_record(fields_of(ev))?;
            }
            wtr.flush()?;
        }
        LogFormat::JsonLines => {
            let mut w = io::BufWriter::new(w);
            for ev in events.iter().filter(|e| e.kind() == sensor) {
                let obj: serde_json::Map<String, serde_json::Value> = header
                    .iter()
                    .zip(fields_of(ev))
                    .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
                    .collect();
                serde_json::to_writer(&mut w, &obj).map_err(io::Error::from)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Events grouped by participant, each group in stream order.
pub fn group_by_participant(events: Vec<SensorEvent>) -> BTreeMap<String, Vec<SensorEvent>> {
    let mut out: BTreeMap<String, Vec<SensorEvent>> = BTreeMap::new();
    for ev in events {
        out.entry(ev.participant_id.clone()).or_default().push(ev);
    }
    out
}

/// Index of per-participant row counts, used to check merge invariants.
pub fn count_by_participant(events: &[SensorEvent]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for e in events {
        *m.entry(e.participant_id.as_str()).or_insert(0) += 1;
    }
    m
}
