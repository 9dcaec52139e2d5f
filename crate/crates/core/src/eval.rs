//! MAE/MBE at item and total level, zero-to-one-shot change rates and the
//! report bundle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::features::FeatureCatalog;
use crate::forest::{best_subset, BestFeature, RfeTrace};
use crate::llm::{LlmPrediction, PredictionRow, PromptMode};
use crate::model::{score_total, AssessmentPoint, SensorKind, Stage, ITEM_COUNT};

/// Slack for the `|MBE| <= MAE` check, which holds exactly in real arithmetic.
const BIAS_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {0} predictions vs {1} targets")]
    Mismatch(usize, usize),
    #[error("|MBE| {mbe} exceeds MAE {mae}")]
    BiasBound { mae: f64, mbe: f64 },
    #[error("prediction is invalid")]
    InvalidPrediction,
    #[error("nothing to report")]
    NothingToReport,
}

fn check(pred: &[f64], truth: &[f64]) -> Result<(), EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::Mismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64, EvalError> {
    check(pred, truth)?;
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

pub fn mbe(pred: &[f64], truth: &[f64]) -> Result<f64, EvalError> {
    check(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| p - t).sum::<f64>() / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub mae: f64,
    pub mbe: f64,
    pub n: usize,
}

impl Metric {
    pub fn compute(pred: &[f64], truth: &[f64]) -> Result<Self, EvalError> {
        Self::checked(mae(pred, truth)?, mbe(pred, truth)?, pred.len())
    }

    /// Build from precomputed values, enforcing `|mbe| <= mae`.
    pub fn checked(mae: f64, mbe: f64, n: usize) -> Result<Self, EvalError> {
        if mbe.abs() > mae + BIAS_BOUND_TOL {
            return Err(EvalError::BiasBound { mae, mbe });
        }
        Ok(Self { mae, mbe, n })
    }
}

/// Predicted ULS-8 total. With `reverse_coded` items 3 and 6 are scored `5 - s`
/// before summing, otherwise the raw responses are summed.
pub fn total_from_prediction(p: &LlmPrediction, reverse_coded: bool) -> u8 {
    let s = p.scores();
    if reverse_coded {
        let v: Vec<i64> = s.iter().map(|&x| x as i64).collect();
        score_total(&v).expect("validated prediction")
    } else {
        s.iter().sum()
    }
}

/// As [`total_from_prediction`] for a stored row.
pub fn row_total(row: &PredictionRow, reverse_coded: bool) -> Result<u8, EvalError> {
    let p = row.prediction().ok_or(EvalError::InvalidPrediction)?;
    Ok(total_from_prediction(&p, reverse_coded))
}

/// `(one - zero) / zero * 100`; `None` when `zero` is 0.
pub fn change_rate(zero: f64, one: f64) -> Option<f64> {
    if zero == 0.0 {
        None
    } else {
        Some((one - zero) / zero * 100.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeRate {
    pub mae_pct: Option<f64>,
    pub mbe_pct: Option<f64>,
}

pub fn change_rates(zero: &Metric, one: &Metric) -> ChangeRate {
    ChangeRate {
        mae_pct: change_rate(zero.mae, one.mae),
        mbe_pct: change_rate(zero.mbe, one.mbe),
    }
}

/// Two decimals, the display precision of MAE/MBE.
pub fn fmt_metric(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// One decimal with a percent sign; `null` when undefined.
pub fn fmt_pct(x: Option<f64>) -> String {
    match x {
        Some(v) => {
            let s = format!("{v:.1}");
            if s == "-0.0" {
                "0.0%".into()
            } else {
                format!("{s}%")
            }
        }
        None => "null".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorMetrics {
    pub sensor: SensorKind,
    pub zero_shot: Option<Metric>,
    pub one_shot: Option<Metric>,
    pub change_rate: Option<ChangeRate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRow {
    pub mode: PromptMode,
    pub sensor: SensorKind,
    /// MAE of raw item responses, item 1 first.
    pub item_mae: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantError {
    pub mode: PromptMode,
    pub sensor: SensorKind,
    pub participant: String,
    pub truth_total: u8,
    pub predicted_total: u8,
    pub abs_error: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusions {
    pub mode: PromptMode,
    pub sensor: SensorKind,
    pub invalid: usize,
    pub no_truth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub reverse_coded: bool,
    pub stage: Option<Stage>,
    pub n_participants: usize,
    pub sensors: Vec<SensorMetrics>,
    pub item_grid: Vec<ItemRow>,
    pub participant_errors: Vec<ParticipantError>,
    pub excluded: Vec<Exclusions>,
}

impl MetricsReport {
    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }
}

/// Score predictions against the assessments of their stage. Invalid rows are
/// dropped pairwise and counted.
pub fn compute_metrics(
    rows: &[PredictionRow],
    assessments: &[AssessmentPoint],
    reverse_coded: bool,
) -> Result<MetricsReport, EvalError> {
    let truth: BTreeMap<(&str, Stage), &AssessmentPoint> = assessments
        .iter()
        .map(|a| ((a.participant_id.as_str(), a.stage), a))
        .collect();
    let mut groups: BTreeMap<(SensorKind, PromptMode), Vec<&PredictionRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.sensor, r.mode)).or_default().push(r);
    }
    let mut per_sensor: BTreeMap<SensorKind, SensorMetrics> = BTreeMap::new();
    let mut item_grid = Vec::new();
    let mut participant_errors = Vec::new();
    let mut excluded = Vec::new();
    let mut participants = BTreeSet::new();
    let stages: BTreeSet<Stage> = rows.iter().map(|r| r.stage).collect();

    for ((sensor, mode), mut group) in groups {
        group.sort_by(|a, b| a.participant.cmp(&b.participant));
        let mut pred_total = Vec::new();
        let mut true_total = Vec::new();
        let mut item_pred = vec![Vec::new(); ITEM_COUNT];
        let mut item_true = vec![Vec::new(); ITEM_COUNT];
        let mut ex = Exclusions {
            mode,
            sensor,
            invalid: 0,
            no_truth: 0,
        };
        for r in group {
            let Some(a) = truth.get(&(r.participant.as_str(), r.stage)) else {
                ex.no_truth += 1;
                continue;
            };
            let Some(p) = r.prediction() else {
                ex.invalid += 1;
                continue;
            };
            participants.insert(r.participant.clone());
            let pt = total_from_prediction(&p, reverse_coded);
            let tt = a.record.total();
            pred_total.push(pt as f64);
            true_total.push(tt as f64);
            participant_errors.push(ParticipantError {
                mode,
                sensor,
                participant: r.participant.clone(),
                truth_total: tt,
                predicted_total: pt,
                abs_error: pt.abs_diff(tt),
            });
            for (k, s) in p.scores().iter().enumerate() {
                item_pred[k].push(*s as f64);
                item_true[k].push(a.record.items()[k] as f64);
            }
        }
        excluded.push(ex);
        if pred_total.is_empty() {
            continue;
        }
        let metric = Metric::compute(&pred_total, &true_total)?;
        for k in 0..ITEM_COUNT {
            Metric::compute(&item_pred[k], &item_true[k])?;
        }
        item_grid.push(ItemRow {
            mode,
            sensor,
            item_mae: (0..ITEM_COUNT)
                .map(|k| mae(&item_pred[k], &item_true[k]))
                .collect::<Result<_, _>>()?,
        });
        let slot = per_sensor.entry(sensor).or_insert(SensorMetrics {
            sensor,
            zero_shot: None,
            one_shot: None,
            change_rate: None,
        });
        match mode {
            PromptMode::ZeroShot => slot.zero_shot = Some(metric),
            PromptMode::OneShot => slot.one_shot = Some(metric),
        }
    }
    for m in per_sensor.values_mut() {
        if let (Some(z), Some(o)) = (&m.zero_shot, &m.one_shot) {
            m.change_rate = Some(change_rates(z, o));
        }
    }
    Ok(MetricsReport {
        reverse_coded,
        stage: if stages.len() == 1 {
            stages.into_iter().next()
        } else {
            None
        },
        n_participants: participants.len(),
        sensors: per_sensor.into_values().collect(),
        item_grid,
        participant_errors,
        excluded,
    })
}

/// One RFE run to include in the report.
#[derive(Debug, Clone, PartialEq)]
pub struct RfeSection {
    pub label: String,
    pub trace: RfeTrace,
}

fn table1(m: &MetricsReport) -> String {
    let mut s = String::from("sensor,zero_mae,zero_mbe,one_mae,one_mbe,mae_change,mbe_change\n");
    let cell = |x: Option<f64>| x.map(fmt_metric).unwrap_or_default();
    let pct = |x: Option<Option<f64>>| x.map(fmt_pct).unwrap_or_default();
    for r in &m.sensors {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.sensor,
            cell(r.zero_shot.map(|v| v.mae)),
            cell(r.zero_shot.map(|v| v.mbe)),
            cell(r.one_shot.map(|v| v.mae)),
            cell(r.one_shot.map(|v| v.mbe)),
            pct(r.change_rate.map(|c| c.mae_pct)),
            pct(r.change_rate.map(|c| c.mbe_pct)),
        );
    }
    s
}

fn item_grid(m: &MetricsReport) -> String {
    let mut s = String::from("mode,sensor");
    for k in 1..=ITEM_COUNT {
        let _ = write!(s, ",item{k}");
    }
    s.push('\n');
    for r in &m.item_grid {
        let _ = write!(s, "{},{}", r.mode, r.sensor);
        for v in &r.item_mae {
            let _ = write!(s, ",{}", fmt_metric(*v));
        }
        s.push('\n');
    }
    s
}

fn participant_errors(m: &MetricsReport) -> String {
    let mut s = String::from("mode,sensor,participant,truth_total,predicted_total,abs_error\n");
    for e in &m.participant_errors {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            e.mode, e.sensor, e.participant, e.truth_total, e.predicted_total, e.abs_error
        );
    }
    s
}

fn trace_table(t: &RfeTrace) -> String {
    let mut s = String::from("remaining,cv_mae,cv_mbe\n");
    for st in &t.steps {
        let _ = writeln!(s, "{},{},{}", st.remaining.len(), st.cv_mae, st.cv_mbe);
    }
    s
}

fn best_table(rows: &[BestFeature]) -> String {
    let mut s = String::from("number,sensor,feature,day\n");
    for r in rows {
        let feature = if r.feature.contains(',') {
            format!("\"{}\"", r.feature)
        } else {
            r.feature.clone()
        };
        let _ = writeln!(s, "{},{},{},{}", r.number, r.sensor, feature, r.day);
    }
    s
}

fn summary(m: Option<&MetricsReport>, rfe: &[RfeSection], catalog: &FeatureCatalog) -> String {
    let mut s = String::from("# Loneliness prediction report\n");
    if let Some(m) = m.filter(|m| !m.is_empty()) {
        let _ = writeln!(s, "\n## Personalized LLM inference\n");
        let _ = writeln!(
            s,
            "Participants scored: {}. Predicted totals {} reverse-coded before summing.\n",
            m.n_participants,
            if m.reverse_coded { "are" } else { "are not" }
        );
        s.push_str("| Sensor | Zero-shot MAE | Zero-shot MBE | One-shot MAE | One-shot MBE | MAE change | MBE change |\n");
        s.push_str("|---|---|---|---|---|---|---|\n");
        let cell = |x: Option<f64>| x.map(fmt_metric).unwrap_or_else(|| "-".into());
        let pct = |x: Option<Option<f64>>| x.map(fmt_pct).unwrap_or_else(|| "-".into());
        for r in &m.sensors {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} |",
                r.sensor,
                cell(r.zero_shot.map(|v| v.mae)),
                cell(r.zero_shot.map(|v| v.mbe)),
                cell(r.one_shot.map(|v| v.mae)),
                cell(r.one_shot.map(|v| v.mbe)),
                pct(r.change_rate.map(|c| c.mae_pct)),
                pct(r.change_rate.map(|c| c.mbe_pct)),
            );
        }
        let dropped: Vec<String> = m
            .excluded
            .iter()
            .filter(|e| e.invalid + e.no_truth > 0)
            .map(|e| {
                format!(
                    "{} {}: {} invalid, {} without truth",
                    e.mode, e.sensor, e.invalid, e.no_truth
                )
            })
            .collect();
        let _ = writeln!(
            s,
            "\nExcluded predictions: {}",
            if dropped.is_empty() {
                "none".to_string()
            } else {
                dropped.join("; ")
            }
        );
    }
    for sec in rfe {
        let best = sec.trace.argmin();
        let _ = writeln!(
            s,
            "\n## Random forest with recursive feature elimination: {}\n",
            sec.label
        );
        let _ = writeln!(
            s,
            "Rows: {}. Target: {}. Minimum CV MAE {} (MBE {}) with {} remaining features.\n",
            sec.trace.n_rows,
            sec.trace.target,
            fmt_metric(best.cv_mae),
            fmt_metric(best.cv_mbe),
            best.remaining.len()
        );
        s.push_str("| Number | Sensor | Feature |\n|---|---|---|\n");
        for r in best_subset(&sec.trace, catalog) {
            let _ = writeln!(s, "| {} | {} | {} |", r.number, r.sensor, r.label());
        }
    }
    s
}

/// Render every report file in memory, keyed by file name.
pub fn render_report(
    metrics: Option<&MetricsReport>,
    rfe: &[RfeSection],
    catalog: &FeatureCatalog,
) -> Result<BTreeMap<String, String>, EvalError> {
    let has_llm = metrics.is_some_and(|m| !m.is_empty());
    if !has_llm && rfe.is_empty() {
        return Err(EvalError::NothingToReport);
    }
    for sec in rfe {
        for st in &sec.trace.steps {
            Metric::checked(st.cv_mae, st.cv_mbe, sec.trace.n_rows)?;
        }
    }
    let mut files = BTreeMap::new();
    if let Some(m) = metrics.filter(|_| has_llm) {
        for r in &m.sensors {
            for v in r.zero_shot.iter().chain(&r.one_shot) {
                Metric::checked(v.mae, v.mbe, v.n)?;
            }
        }
        files.insert("table1.csv".into(), table1(m));
        files.insert("item_mae_grid.csv".into(), item_grid(m));
        files.insert("participant_errors.csv".into(), participant_errors(m));
        files.insert(
            "metrics.json".into(),
            serde_json::to_string_pretty(m).expect("plain data") + "\n",
        );
    }
    for sec in rfe {
        files.insert(
            format!("rfe_trace_{}.csv", sec.label),
            trace_table(&sec.trace),
        );
        files.insert(
            format!("rfe_best_{}.csv", sec.label),
            best_table(&best_subset(&sec.trace, catalog)),
        );
    }
    files.insert("summary.md".into(), summary(metrics, rfe, catalog));
    Ok(files)
}

pub fn emit_report(
    metrics: Option<&MetricsReport>,
    rfe: &[RfeSection],
    catalog: &FeatureCatalog,
    dir: &Path,
) -> std::io::Result<Vec<PathBuf>> {
    let files = render_report(metrics, rfe, catalog)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Target;
    use crate::forest::RfeStep;
    use crate::llm::PredictionEntry;
    use crate::model::Uls8Record;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn pred(scores: [u8; 8]) -> LlmPrediction {
        LlmPrediction::from_entries(
            (0..8)
                .map(|i| PredictionEntry {
                    entry: i as u8 + 1,
                    score: scores[i],
                    reason: String::new(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn basic_metrics() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mbe(&[3.0, 4.0], &[1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(mae(&[3.0, 4.0], &[1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(mae(&[10.0, 14.0], &[12.0, 10.0]).unwrap(), 3.0);
        assert_eq!(mbe(&[10.0, 14.0], &[12.0, 10.0]).unwrap(), 1.0);
        assert_eq!(mae(&[], &[]), Err(EvalError::Empty));
        assert_eq!(mae(&[1.0], &[]), Err(EvalError::Mismatch(1, 0)));
    }

    #[test]
    fn totals() {
        assert_eq!(total_from_prediction(&pred([1; 8]), true), 14);
        assert_eq!(total_from_prediction(&pred([1; 8]), false), 8);
        assert_eq!(total_from_prediction(&pred([4; 8]), true), 26);
    }

    #[test]
    fn change_rate_display() {
        assert_eq!(fmt_pct(change_rate(8.60, 5.17)), "-39.9%");
        assert_eq!(fmt_pct(change_rate(11.10, 6.40)), "-42.3%");
        assert_eq!(fmt_pct(change_rate(5.0, 5.0)), "0.0%");
        assert_eq!(fmt_pct(change_rate(0.0, 5.0)), "null");
    }

    #[test]
    fn bias_bound_violation_detected() {
        assert!(matches!(
            Metric::checked(1.0, -1.5, 3),
            Err(EvalError::BiasBound { .. })
        ));
        assert!(Metric::checked(2.0, -2.0, 3).is_ok());
    }

    fn row(
        p: &str,
        sensor: SensorKind,
        mode: PromptMode,
        scores: Option<[u8; 8]>,
    ) -> PredictionRow {
        PredictionRow {
            participant: p.into(),
            stage: Stage::EndOfSemester,
            sensor,
            mode,
            prompt_hash: String::new(),
            raw_hash: String::new(),
            valid: scores.is_some(),
            error: scores.is_none().then(|| "json".into()),
            attempts: 1,
            entries: scores
                .map(|s| pred(s).entries().to_vec())
                .unwrap_or_default(),
        }
    }

    fn truth(p: &str, items: [i64; 8]) -> AssessmentPoint {
        AssessmentPoint {
            participant_id: p.into(),
            stage: Stage::EndOfSemester,
            assessment_date: NaiveDate::from_ymd_opt(2024, 6, 1).unwrap(),
            record: Uls8Record::new(&items).unwrap(),
        }
    }

    #[test]
    fn metrics_with_exclusion() {
        let rows = vec![
            row("a", SensorKind::Screen, PromptMode::ZeroShot, Some([1; 8])),
            row("b", SensorKind::Screen, PromptMode::ZeroShot, None),
            row("a", SensorKind::Screen, PromptMode::OneShot, Some([2; 8])),
        ];
        let truths = vec![truth("a", [2; 8]), truth("b", [2; 8])];
        let m = compute_metrics(&rows, &truths, true).unwrap();
        // truth total: 6*2 + 2*3 = 18; zero-shot total 14; one-shot total 18
        let s = &m.sensors[0];
        assert_eq!(s.zero_shot.unwrap().mae, 4.0);
        assert_eq!(s.zero_shot.unwrap().mbe, -4.0);
        assert_eq!(s.one_shot.unwrap().mae, 0.0);
        assert_eq!(s.change_rate.unwrap().mae_pct, Some(-100.0));
        assert_eq!(s.change_rate.unwrap().mbe_pct, Some(-100.0));
        assert_eq!(m.excluded.iter().map(|e| e.invalid).sum::<usize>(), 1);
        assert_eq!(m.item_grid.len(), 2);
        let grid = |mode| {
            m.item_grid
                .iter()
                .find(|r| r.mode == mode)
                .unwrap()
                .item_mae
                .clone()
        };
        assert_eq!(grid(PromptMode::ZeroShot), vec![1.0; 8]);
        assert_eq!(grid(PromptMode::OneShot), vec![0.0; 8]);
        assert_eq!(m.n_participants, 1);
    }

    #[test]
    fn table1_golden() {
        let m = MetricsReport {
            reverse_coded: true,
            stage: Some(Stage::EndOfSemester),
            n_participants: 2,
            sensors: vec![
                SensorMetrics {
                    sensor: SensorKind::Applications,
                    zero_shot: Some(Metric {
                        mae: 8.60,
                        mbe: 8.32,
                        n: 2,
                    }),
                    one_shot: Some(Metric {
                        mae: 5.17,
                        mbe: 3.87,
                        n: 2,
                    }),
                    change_rate: Some(change_rates(
                        &Metric {
                            mae: 8.60,
                            mbe: 8.32,
                            n: 2,
                        },
                        &Metric {
                            mae: 5.17,
                            mbe: 3.87,
                            n: 2,
                        },
                    )),
                },
                SensorMetrics {
                    sensor: SensorKind::Keyboard,
                    zero_shot: Some(Metric {
                        mae: 11.10,
                        mbe: 10.90,
                        n: 2,
                    }),
                    one_shot: None,
                    change_rate: None,
                },
            ],
            item_grid: vec![],
            participant_errors: vec![],
            excluded: vec![],
        };
        let cat = crate::features::ExtractParams::default().catalog();
        let files = render_report(Some(&m), &[], &cat).unwrap();
        assert_eq!(
            files["table1.csv"],
            "sensor,zero_mae,zero_mbe,one_mae,one_mbe,mae_change,mbe_change\n\
             Applications,8.60,8.32,5.17,3.87,-39.9%,-53.5%\n\
             Keyboard,11.10,10.90,,,,\n"
        );
    }

    #[test]
    fn rfe_only_report() {
        let trace = RfeTrace {
            target: Target::Total,
            n_rows: 9,
            steps: vec![RfeStep {
                step: 1,
                remaining: vec!["screen_unlock_episode_count__day5".into()],
                cv_mae: 3.29,
                cv_mbe: -0.5,
                eliminated: vec![],
            }],
            ranking: vec![],
        };
        let cat = crate::features::ExtractParams::default().catalog();
        let files = render_report(
            None,
            &[RfeSection {
                label: "midterm".into(),
                trace,
            }],
            &cat,
        )
        .unwrap();
        let names: Vec<&str> = files.keys().map(String::as_str).collect();
        assert_eq!(
            names,
            vec![
                "rfe_best_midterm.csv",
                "rfe_trace_midterm.csv",
                "summary.md"
            ]
        );
        assert!(files["summary.md"].contains("| 1 | Screen | Unlock episode count (Day 5) |"));
        assert!(!files["summary.md"].contains("LLM"));
        assert_eq!(
            render_report(None, &[], &cat),
            Err(EvalError::NothingToReport)
        );
    }

    proptest! {
        #[test]
        fn metric_properties(pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..60)) {
            let p: Vec<f64> = pairs.iter().map(|x| x.0).collect();
            let t: Vec<f64> = pairs.iter().map(|x| x.1).collect();
            let m = Metric::compute(&p, &t).unwrap();
            prop_assert!(m.mbe.abs() <= m.mae + 1e-9);
            prop_assert!((mbe(&t, &p).unwrap() + m.mbe).abs() < 1e-9);
            let mut rp = p.clone();
            let mut rt = t.clone();
            rp.reverse();
            rt.reverse();
            prop_assert!((mae(&rp, &rt).unwrap() - m.mae).abs() < 1e-9);
        }
    }
}
