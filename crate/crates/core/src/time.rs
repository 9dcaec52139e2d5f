//! Time-zone handling: UTC epoch milliseconds to participant-local calendar days.

use std::fmt;
use std::str::FromStr;

use chrono::{
    DateTime, Duration, FixedOffset, LocalResult, NaiveDate, NaiveTime, TimeZone, Timelike,
};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MS_PER_MINUTE: i64 = 60_000;
pub const MS_PER_DAY: i64 = 86_400_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown time zone `{0}`")]
pub struct UnknownZone(pub String);

/// An IANA zone or a fixed UTC offset (`UTC+10`, `+10:00`, `UTC-03:30`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    Iana(Tz),
    Fixed(FixedOffset),
}

impl Zone {
    pub fn utc() -> Self {
        Zone::Iana(Tz::UTC)
    }

    /// Local date and time-of-day of an instant.
    pub fn localize(&self, ts_ms: i64) -> LocalStamp {
        let utc = DateTime::from_timestamp_millis(ts_ms).expect("timestamp within chrono range");
        let naive = match self {
            Zone::Iana(tz) => utc.with_timezone(tz).naive_local(),
            Zone::Fixed(off) => utc.with_timezone(off).naive_local(),
        };
        let t = naive.time();
        LocalStamp {
            date: naive.date(),
            minute_of_day: t.hour() * 60 + t.minute(),
            ms_in_minute: t.second() * 1000 + t.nanosecond() / 1_000_000,
        }
    }

    /// UTC epoch ms of local midnight starting `date`.
    ///
    /// When midnight falls in a DST gap the earliest valid instant of the day is used.
    pub fn day_start_ms(&self, date: NaiveDate) -> i64 {
        let midnight = date.and_time(NaiveTime::MIN);
        match self {
            Zone::Fixed(off) => off
                .from_local_datetime(&midnight)
                .single()
                .expect("fixed offsets are unambiguous")
                .timestamp_millis(),
            Zone::Iana(tz) => {
                let mut probe = midnight;
                loop {
                    match tz.from_local_datetime(&probe) {
                        LocalResult::Single(t) => return t.timestamp_millis(),
                        LocalResult::Ambiguous(early, _) => return early.timestamp_millis(),
                        LocalResult::None => probe += Duration::minutes(1),
                    }
                }
            }
        }
    }

    /// Half-open UTC interval `[start, end)` covering the local calendar day.
    pub fn day_bounds(&self, date: NaiveDate) -> (i64, i64) {
        let next = date.succ_opt().expect("date in range");
        (self.day_start_ms(date), self.day_start_ms(next))
    }
}

impl Default for Zone {
    fn default() -> Self {
        Zone::utc()
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Zone::Iana(tz) => f.write_str(tz.name()),
            Zone::Fixed(off) => write!(f, "UTC{off}"),
        }
    }
}

impl FromStr for Zone {
    type Err = UnknownZone;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(tz) = s.parse::<Tz>() {
            return Ok(Zone::Iana(tz));
        }
        let rest = s
            .strip_prefix("UTC")
            .or_else(|| s.strip_prefix("GMT"))
            .unwrap_or(s);
        parse_offset(rest)
            .map(Zone::Fixed)
            .ok_or_else(|| UnknownZone(s.to_string()))
    }
}

fn parse_offset(s: &str) -> Option<FixedOffset> {
    let (sign, body) = match s.as_bytes().first()? {
        b'+' => (1, &s[1..]),
        b'-' => (-1, &s[1..]),
        _ => return None,
    };
    let (h, m) = match body.split_once(':') {
        Some((h, m)) => (h.parse::<i32>().ok()?, m.parse::<i32>().ok()?),
        None if body.len() == 4 => (body[..2].parse().ok()?, body[2..].parse().ok()?),
        None => (body.parse().ok()?, 0),
    };
    if h > 14 || m >= 60 {
        return None;
    }
    FixedOffset::east_opt(sign * (h * 3600 + m * 60))
}

impl Serialize for Zone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Zone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Local calendar position of an instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalStamp {
    pub date: NaiveDate,
    pub minute_of_day: u32,
    pub ms_in_minute: u32,
}

impl LocalStamp {
    /// Minutes after local midnight including the fractional part.
    pub fn minutes(&self) -> f64 {
        self.minute_of_day as f64 + self.ms_in_minute as f64 / MS_PER_MINUTE as f64
    }
}

/// Map `ts_ms` to local date and minutes after midnight in the named zone.
pub fn localize(ts_ms: i64, zone: &str) -> Result<LocalStamp, UnknownZone> {
    Ok(zone.parse::<Zone>()?.localize(ts_ms))
}
