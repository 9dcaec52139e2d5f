//! Recursive feature elimination driven by k-fold cross-validated forests.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{columns_of, train_columns, ForestConfig, ForestError};
use crate::dataset::{split_column, FlatDataset, Target};
use crate::features::FeatureCatalog;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RfeError {
    #[error("{rows} rows cannot fill {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("need at least 2 folds, got {0}")]
    Folds(usize),
    #[error("step must be >= 1")]
    ZeroStep,
    #[error("step {step} must be smaller than the {features} available features")]
    StepTooLarge { step: usize, features: usize },
    #[error("min_features {min} outside 1..={features}")]
    MinFeatures { min: usize, features: usize },
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for RfeError {
    fn from(e: csv::Error) -> Self {
        RfeError::Csv(e.to_string())
    }
}

/// Where elimination importances come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceSource {
    /// Mean over the fold-trained forests.
    #[default]
    FoldAverage,
    /// One extra forest fitted on all rows.
    FullFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfeConfig {
    pub folds: usize,
    pub step: usize,
    pub min_features: usize,
    pub importance: ImportanceSource,
    /// Seeds the fold permutation.
    pub seed: u64,
}

impl Default for RfeConfig {
    fn default() -> Self {
        Self {
            folds: 3,
            step: 1,
            min_features: 1,
            importance: ImportanceSource::FoldAverage,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeStep {
    pub step: usize,
    pub remaining: Vec<String>,
    pub cv_mae: f64,
    pub cv_mbe: f64,
    /// Removed after this step's evaluation; empty on the last step.
    pub eliminated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeTrace {
    pub target: Target,
    pub n_rows: usize,
    pub steps: Vec<RfeStep>,
    /// Most important first; survivors have no elimination step.
    pub ranking: Vec<(String, Option<usize>)>,
}

impl RfeTrace {
    /// Step with the lowest cv_mae; the earliest wins ties.
    pub fn argmin(&self) -> &RfeStep {
        self.steps
            .iter()
            .fold(None::<&RfeStep>, |best, s| match best {
                Some(b) if b.cv_mae <= s.cv_mae => Some(b),
                _ => Some(s),
            })
            .expect("trace has at least one step")
    }
}

/// Fold index of each row: a seeded permutation dealt round-robin.
pub fn fold_assignment(n_rows: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n_rows];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % folds;
    }
    fold
}

/// Held-out `(row, prediction)` pairs and importances from one fold.
type FoldOutcome = (Vec<(usize, f64)>, Vec<f64>);

struct CvResult {
    mae: f64,
    mbe: f64,
    importances: Vec<f64>,
}

fn cross_validate(
    cols: &[Vec<f64>],
    y: &[f64],
    active: &[usize],
    fold_of: &[usize],
    folds: usize,
    forest: &ForestConfig,
    source: ImportanceSource,
) -> CvResult {
    let sub: Vec<&Vec<f64>> = active.iter().map(|&c| &cols[c]).collect();
    let per_fold: Vec<FoldOutcome> = (0..folds)
        .into_par_iter()
        .map(|k| {
            let train: Vec<usize> = (0..y.len()).filter(|&i| fold_of[i] != k).collect();
            let test: Vec<usize> = (0..y.len()).filter(|&i| fold_of[i] == k).collect();
            let tcols: Vec<Vec<f64>> = sub
                .iter()
                .map(|c| train.iter().map(|&i| c[i]).collect())
                .collect();
            let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let cfg = ForestConfig {
                rng_seed: forest.rng_seed.wrapping_add(k as u64),
                ..forest.clone()
            };
            let f = train_columns(&tcols, &ty, &cfg);
            let preds = test
                .iter()
                .map(|&i| {
                    let row: Vec<f64> = sub.iter().map(|c| c[i]).collect();
                    (i, f.predict_row(&row))
                })
                .collect();
            (preds, f.feature_importances)
        })
        .collect();
    let mut abs = 0.0;
    let mut signed = 0.0;
    let mut n = 0usize;
    for (preds, _) in &per_fold {
        for &(i, p) in preds {
            abs += (p - y[i]).abs();
            signed += p - y[i];
            n += 1;
        }
    }
    let importances = match source {
        ImportanceSource::FoldAverage => {
            let mut imp = vec![0.0; active.len()];
            for (_, fi) in &per_fold {
                for (a, v) in imp.iter_mut().zip(fi) {
                    *a += v / folds as f64;
                }
            }
            imp
        }
        ImportanceSource::FullFit => {
            let full: Vec<Vec<f64>> = sub.iter().map(|c| (*c).clone()).collect();
            train_columns(&full, y, forest).feature_importances
        }
    };
    CvResult {
        mae: abs / n as f64,
        mbe: signed / n as f64,
        importances,
    }
}

pub fn run_rfe(
    dataset: &FlatDataset,
    forest: &ForestConfig,
    cfg: &RfeConfig,
) -> Result<RfeTrace, RfeError> {
    forest.validate()?;
    let n = dataset.n_rows();
    let f = dataset.n_cols();
    if cfg.folds < 2 {
        return Err(RfeError::Folds(cfg.folds));
    }
    if n < cfg.folds {
        return Err(RfeError::TooFewRows {
            rows: n,
            folds: cfg.folds,
        });
    }
    if cfg.step == 0 {
        return Err(RfeError::ZeroStep);
    }
    if cfg.min_features == 0 || cfg.min_features > f {
        return Err(RfeError::MinFeatures {
            min: cfg.min_features,
            features: f,
        });
    }
    if f > cfg.min_features && cfg.step >= f {
        return Err(RfeError::StepTooLarge {
            step: cfg.step,
            features: f,
        });
    }
    if dataset
        .x
        .iter()
        .flatten()
        .chain(&dataset.y)
        .any(|v| !v.is_finite())
    {
        return Err(ForestError::NonFinite.into());
    }
    let cols = columns_of(&dataset.x, f);
    let fold_of = fold_assignment(n, cfg.folds, cfg.seed);
    let mut active: Vec<usize> = (0..f).collect();
    let mut steps = Vec::new();
    let mut eliminated_at: Vec<Option<usize>> = vec![None; f];
    let mut removal_order: Vec<usize> = Vec::new();
    loop {
        let step_no = steps.len() + 1;
        let cv = cross_validate(
            &cols,
            &dataset.y,
            &active,
            &fold_of,
            cfg.folds,
            forest,
            cfg.importance,
        );
        let remaining: Vec<String> = active.iter().map(|&c| dataset.columns[c].clone()).collect();
        if active.len() <= cfg.min_features {
            steps.push(RfeStep {
                step: step_no,
                remaining,
                cv_mae: cv.mae,
                cv_mbe: cv.mbe,
                eliminated: Vec::new(),
            });
            break;
        }
        let k = cfg.step.min(active.len() - cfg.min_features);
        // Lowest importance first; on ties the larger column index goes first.
        let mut order: Vec<usize> = (0..active.len()).collect();
        order.sort_by(|&a, &b| {
            cv.importances[a]
                .total_cmp(&cv.importances[b])
                .then(active[b].cmp(&active[a]))
        });
        let drop: Vec<usize> = order[..k].iter().map(|&p| active[p]).collect();
        for &c in &drop {
            eliminated_at[c] = Some(step_no);
            removal_order.push(c);
        }
        steps.push(RfeStep {
            step: step_no,
            remaining,
            cv_mae: cv.mae,
            cv_mbe: cv.mbe,
            eliminated: drop.iter().map(|&c| dataset.columns[c].clone()).collect(),
        });
        active.retain(|c| !drop.contains(c));
    }
    let mut ranking: Vec<(String, Option<usize>)> = active
        .iter()
        .map(|&c| (dataset.columns[c].clone(), None))
        .collect();
    ranking.extend(
        removal_order
            .iter()
            .rev()
            .map(|&c| (dataset.columns[c].clone(), eliminated_at[c])),
    );
    Ok(RfeTrace {
        target: dataset.target,
        n_rows: n,
        steps,
        ranking,
    })
}

/// `step,remaining,cv_mae,cv_mbe,eliminated`; multiple eliminated names are `;`-joined.
pub fn write_trace<W: Write>(w: W, trace: &RfeTrace) -> Result<(), RfeError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["step", "remaining", "cv_mae", "cv_mbe", "eliminated"])?;
    for s in &trace.steps {
        wtr.write_record([
            s.step.to_string(),
            s.remaining.len().to_string(),
            s.cv_mae.to_string(),
            s.cv_mbe.to_string(),
            s.eliminated.join(";"),
        ])?;
    }
    wtr.flush().map_err(|e| RfeError::Csv(e.to_string()))
}

/// `feature,elimination_step`; survivors leave the step empty.
pub fn write_ranking<W: Write>(w: W, trace: &RfeTrace) -> Result<(), RfeError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["feature", "elimination_step"])?;
    for (name, step) in &trace.ranking {
        wtr.write_record([
            name.clone(),
            step.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush().map_err(|e| RfeError::Csv(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestFeature {
    pub number: usize,
    pub sensor: String,
    pub feature: String,
    pub day: usize,
}

impl BestFeature {
    /// `Total unlock duration (s) (Day 3)`
    pub fn label(&self) -> String {
        format!("{} (Day {})", self.feature, self.day)
    }
}

/// Features of the argmin step, sorted by sensor, feature and day.
pub fn best_subset(trace: &RfeTrace, catalog: &FeatureCatalog) -> Vec<BestFeature> {
    let mut rows: Vec<(String, String, usize)> = trace
        .argmin()
        .remaining
        .iter()
        .map(|col| {
            let (name, day) = split_column(col).unwrap_or((col.as_str(), 0));
            match catalog.get(name) {
                Some(def) => (def.sensor.name().to_string(), def.description.clone(), day),
                None => ("Unknown".to_string(), name.to_string(), day),
            }
        })
        .collect();
    rows.sort();
    rows.into_iter()
        .enumerate()
        .map(|(i, (sensor, feature, day))| BestFeature {
            number: i + 1,
            sensor,
            feature,
            day,
        })
        .collect()
}

/// `number,sensor,feature,day`
pub fn write_best_subset<W: Write>(w: W, rows: &[BestFeature]) -> Result<(), RfeError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["number", "sensor", "feature", "day"])?;
    for r in rows {
        wtr.write_record([
            r.number.to_string(),
            r.sensor.clone(),
            r.feature.clone(),
            r.day.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| RfeError::Csv(e.to_string()))
}
