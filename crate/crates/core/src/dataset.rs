//! 14-day pre-assessment windows and the flattened model matrix.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::features::{DailyFeatureRow, FeatureCatalog};
use crate::model::{scored_item, AssessmentPoint, SensorKind, Stage, Uls8Record, ITEM_COUNT};

pub const WINDOW_DAYS: usize = 14;
pub const MIN_COVERAGE_DAYS: usize = 7;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("no assessment for participant `{participant}` at stage {stage}")]
    MissingAssessment { participant: String, stage: Stage },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset table: {0}")]
    Format(String),
}

/// Which days count towards coverage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverageRule {
    pub min_days: usize,
    /// Sensors whose presence counts; empty means any sensor.
    pub sensors: Vec<SensorKind>,
}

impl Default for CoverageRule {
    fn default() -> Self {
        Self {
            min_days: MIN_COVERAGE_DAYS,
            sensors: Vec::new(),
        }
    }
}

impl CoverageRule {
    pub fn day_counts(&self, row: &DailyFeatureRow) -> bool {
        if self.sensors.is_empty() {
            row.any_sensor_data()
        } else {
            self.sensors
                .iter()
                .any(|s| row.has_any_data.get(s).copied().unwrap_or(false))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWindow {
    pub participant_id: String,
    pub stage: Stage,
    pub assessment_date: NaiveDate,
    pub record: Uls8Record,
    /// Day 1 (oldest) .. Day 14 (day before the assessment).
    pub days: Vec<DailyFeatureRow>,
    pub coverage_days: usize,
}

impl FeatureWindow {
    /// Days `[7*(week-1), 7*week)`, `week` in 1..=2.
    pub fn week(&self, week: usize) -> &[DailyFeatureRow] {
        &self.days[7 * (week - 1)..7 * week]
    }

    pub fn values(&self, feature: &str) -> Vec<f64> {
        self.days.iter().map(|d| d.value(feature)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowOutcome {
    Included(FeatureWindow),
    Excluded(Exclusion),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Exclusion {
    pub participant_id: String,
    pub stage: Stage,
    pub reason: String,
}

/// Calendar date of window day `k` (1-based).
pub fn window_day(assessment_date: NaiveDate, k: usize) -> NaiveDate {
    assessment_date - Days::new((WINDOW_DAYS + 1 - k) as u64)
}

/// Window for one assessment. `rows` may be sparse and in any order; only the
/// assessment's participant is considered.
pub fn build_window(
    rows: &[DailyFeatureRow],
    assessment: &AssessmentPoint,
    catalog: &FeatureCatalog,
    rule: &CoverageRule,
) -> WindowOutcome {
    let by_date: BTreeMap<NaiveDate, &DailyFeatureRow> = rows
        .iter()
        .filter(|r| r.participant_id == assessment.participant_id)
        .map(|r| (r.date, r))
        .collect();
    let days: Vec<DailyFeatureRow> = (1..=WINDOW_DAYS)
        .map(|k| {
            let date = window_day(assessment.assessment_date, k);
            by_date.get(&date).map(|r| (*r).clone()).unwrap_or_else(|| {
                DailyFeatureRow::empty(&assessment.participant_id, date, catalog)
            })
        })
        .collect();
    let coverage_days = days.iter().filter(|d| rule.day_counts(d)).count();
    if coverage_days < rule.min_days {
        return WindowOutcome::Excluded(Exclusion {
            participant_id: assessment.participant_id.clone(),
            stage: assessment.stage,
            reason: "coverage".into(),
        });
    }
    WindowOutcome::Included(FeatureWindow {
        participant_id: assessment.participant_id.clone(),
        stage: assessment.stage,
        assessment_date: assessment.assessment_date,
        record: assessment.record,
        days,
        coverage_days,
    })
}

/// Look up the assessment for `(participant, stage)` and build its window.
pub fn window_for(
    rows: &[DailyFeatureRow],
    assessments: &[AssessmentPoint],
    participant: &str,
    stage: Stage,
    catalog: &FeatureCatalog,
    rule: &CoverageRule,
) -> Result<WindowOutcome, DatasetError> {
    let a = assessments
        .iter()
        .find(|a| a.participant_id == participant && a.stage == stage)
        .ok_or_else(|| DatasetError::MissingAssessment {
            participant: participant.to_string(),
            stage,
        })?;
    Ok(build_window(rows, a, catalog, rule))
}

/// Windows for every assessment, ordered by (stage, participant).
pub fn build_windows(
    rows: &[DailyFeatureRow],
    assessments: &[AssessmentPoint],
    catalog: &FeatureCatalog,
    rule: &CoverageRule,
) -> (Vec<FeatureWindow>, Vec<Exclusion>) {
    let mut by_pid: BTreeMap<&str, Vec<DailyFeatureRow>> = BTreeMap::new();
    for r in rows {
        by_pid
            .entry(r.participant_id.as_str())
            .or_default()
            .push(r.clone());
    }
    let mut ordered: Vec<&AssessmentPoint> = assessments.iter().collect();
    ordered.sort_by(|a, b| (a.stage, &a.participant_id).cmp(&(b.stage, &b.participant_id)));
    let empty = Vec::new();
    let mut included = Vec::new();
    let mut excluded = Vec::new();
    for a in ordered {
        let own = by_pid.get(a.participant_id.as_str()).unwrap_or(&empty);
        match build_window(own, a, catalog, rule) {
            WindowOutcome::Included(w) => included.push(w),
            WindowOutcome::Excluded(e) => excluded.push(e),
        }
    }
    (included, excluded)
}

/// Regression target taken from the ULS-8 record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Target {
    #[default]
    Total,
    /// Scored (reverse-coded where applicable) value of a 1-indexed item.
    Item(usize),
}

impl Target {
    pub fn of(self, record: &Uls8Record) -> f64 {
        match self {
            Target::Total => record.total() as f64,
            Target::Item(k) => scored_item(k, record.item(k)) as f64,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Total => f.write_str("total"),
            Target::Item(k) => write!(f, "item{k}"),
        }
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "total" {
            return Ok(Target::Total);
        }
        let k: usize = s
            .strip_prefix("item")
            .map(|r| r.trim_start_matches([' ', '_', '-']))
            .and_then(|r| r.parse().ok())
            .ok_or_else(|| format!("unknown target `{s}` (expected `total` or `item<k>`)"))?;
        if !(1..=ITEM_COUNT).contains(&k) {
            return Err(format!("item index {k} outside 1..={ITEM_COUNT}"));
        }
        Ok(Target::Item(k))
    }
}

impl TryFrom<String> for Target {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Target> for String {
    fn from(t: Target) -> Self {
        t.to_string()
    }
}

pub fn column_name(feature: &str, day: usize) -> String {
    format!("{feature}__day{day}")
}

/// Inverse of [`column_name`].
pub fn split_column(column: &str) -> Option<(&str, usize)> {
    let (f, d) = column.rsplit_once("__day")?;
    Some((f, d.parse().ok()?))
}

/// Model-ready matrix: one row per window, `F x 14` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatDataset {
    pub columns: Vec<String>,
    pub row_ids: Vec<(String, Stage)>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub target: Target,
}

impl FlatDataset {
    pub fn n_rows(&self) -> usize {
        self.x.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Keep the listed columns, in the given order.
    pub fn project(&self, cols: &[usize]) -> FlatDataset {
        FlatDataset {
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            row_ids: self.row_ids.clone(),
            x: self
                .x
                .iter()
                .map(|r| cols.iter().map(|&c| r[c]).collect())
                .collect(),
            y: self.y.clone(),
            target: self.target,
        }
    }

    /// Rows of a single stage.
    pub fn stage(&self, stage: Stage) -> FlatDataset {
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&i| self.row_ids[i].1 == stage)
            .collect();
        FlatDataset {
            columns: self.columns.clone(),
            row_ids: keep.iter().map(|&i| self.row_ids[i].clone()).collect(),
            x: keep.iter().map(|&i| self.x[i].clone()).collect(),
            y: keep.iter().map(|&i| self.y[i]).collect(),
            target: self.target,
        }
    }

    /// `participant_id,stage,<columns>,target`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DatasetError> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["participant_id".to_string(), "stage".to_string()];
        header.extend(self.columns.iter().cloned());
        header.push(format!("target:{}", self.target));
        wtr.write_record(&header)?;
        for ((id, x), y) in self.row_ids.iter().zip(&self.x).zip(&self.y) {
            let mut rec = vec![id.0.clone(), id.1.slug().to_string()];
            rec.extend(x.iter().map(|v| v.to_string()));
            rec.push(y.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<FlatDataset, DatasetError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        let n = header.len();
        if n < 3 || &header[0] != "participant_id" || &header[1] != "stage" {
            return Err(DatasetError::Format("bad header".into()));
        }
        let target: Target = header[n - 1]
            .strip_prefix("target:")
            .ok_or_else(|| DatasetError::Format("missing target column".into()))?
            .parse()
            .map_err(DatasetError::Format)?;
        let columns: Vec<String> = header
            .iter()
            .skip(2)
            .take(n - 3)
            .map(String::from)
            .collect();
        let mut ds = FlatDataset {
            columns,
            row_ids: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            target,
        };
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |s: &str| -> Result<f64, DatasetError> {
                s.parse()
                    .map_err(|_| DatasetError::Format(format!("row {}: bad number `{s}`", i + 1)))
            };
            let stage: Stage = rec[1].parse().map_err(DatasetError::Format)?;
            ds.row_ids.push((rec[0].to_string(), stage));
            ds.x.push(
                rec.iter()
                    .skip(2)
                    .take(n - 3)
                    .map(num)
                    .collect::<Result<_, _>>()?,
            );
            ds.y.push(num(&rec[n - 1])?);
        }
        Ok(ds)
    }
}

/// Flatten windows: catalog order outer, day index inner.
pub fn flatten(windows: &[FeatureWindow], catalog: &FeatureCatalog, target: Target) -> FlatDataset {
    let columns = catalog
        .iter()
        .flat_map(|f| (1..=WINDOW_DAYS).map(move |k| column_name(&f.name, k)))
        .collect();
    let x = windows
        .iter()
        .map(|w| {
            catalog
                .iter()
                .flat_map(|f| w.days.iter().map(move |d| d.value(&f.name)))
                .collect()
        })
        .collect();
    FlatDataset {
        columns,
        row_ids: windows
            .iter()
            .map(|w| (w.participant_id.clone(), w.stage))
            .collect(),
        x,
        y: windows.iter().map(|w| target.of(&w.record)).collect(),
        target,
    }
}

/// `participant_id,stage,reason`
pub fn write_exclusions<W: Write>(w: W, exclusions: &[Exclusion]) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["participant_id", "stage", "reason"])?;
    for e in exclusions {
        wtr.write_record([e.participant_id.as_str(), e.stage.slug(), e.reason.as_str()])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `participant_id,stage,assessment_date,item1..item8`
pub fn write_assessments<W: Write>(w: W, points: &[AssessmentPoint]) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec![
        "participant_id".to_string(),
        "stage".into(),
        "assessment_date".into(),
    ];
    header.extend((1..=ITEM_COUNT).map(|k| format!("item{k}")));
    wtr.write_record(&header)?;
    for p in points {
        let mut rec = vec![
            p.participant_id.clone(),
            p.stage.slug().into(),
            p.assessment_date.to_string(),
        ];
        rec.extend(p.record.items().iter().map(|s| s.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads the format of [`write_assessments`]; rejects repeated (participant, stage) pairs.
pub fn read_assessments<R: Read>(r: R) -> Result<Vec<AssessmentPoint>, DatasetError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.len() != 3 + ITEM_COUNT || &header[0] != "participant_id" {
        return Err(DatasetError::Format("assessment header".into()));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| DatasetError::Format(format!("assessment row {}: {what}", i + 1));
        let stage: Stage = rec[1].parse().map_err(|e: String| bad(&e))?;
        let assessment_date: NaiveDate = rec[2].parse().map_err(|_| bad("date"))?;
        let items: Vec<i64> = rec
            .iter()
            .skip(3)
            .map(|s| s.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("item"))?;
        let record = Uls8Record::new(&items).map_err(|e| bad(&e.to_string()))?;
        if !seen.insert((rec[0].to_string(), stage)) {
            return Err(bad("duplicate participant/stage"));
        }
        out.push(AssessmentPoint {
            participant_id: rec[0].to_string(),
            stage,
            assessment_date,
            record,
        });
    }
    Ok(out)
}
