//! Random-forest regression and recursive feature elimination.
//!
//! Importance is mean decrease in variance impurity, the regression analogue
//! of Gini importance. Each tree draws from its own ChaCha8 stream keyed by
//! the tree index, so results do not depend on thread scheduling.

mod rfe;
mod tree;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use rfe::{
    best_subset, fold_assignment, run_rfe, write_best_subset, write_ranking, write_trace,
    BestFeature, ImportanceSource, RfeConfig, RfeError, RfeStep, RfeTrace,
};
pub use tree::{Node, Tree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForestError {
    #[error("empty training data")]
    Empty,
    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("invalid forest config: {0}")]
    Config(String),
}

/// Candidate features per split.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FeaturesPerSplit {
    /// `ceil(F / 3)`.
    #[default]
    Third,
    Fraction(f64),
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            FeaturesPerSplit::Third => n_features.div_ceil(3),
            FeaturesPerSplit::Fraction(f) => (f * n_features as f64).ceil() as usize,
            FeaturesPerSplit::Count(c) => c,
        };
        k.clamp(1, n_features.max(1))
    }

    fn validate(self) -> Result<(), String> {
        match self {
            FeaturesPerSplit::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                Err(format!("features_per_split fraction {f} outside (0, 1]"))
            }
            FeaturesPerSplit::Count(0) => Err("features_per_split count must be >= 1".into()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FeaturesPerSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeaturesPerSplit::Third => f.write_str("third"),
            FeaturesPerSplit::Fraction(x) => write!(f, "{x}"),
            FeaturesPerSplit::Count(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FpsRepr {
    Count(u64),
    Fraction(f64),
    Name(String),
}

impl Serialize for FeaturesPerSplit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            FeaturesPerSplit::Third => FpsRepr::Name("third".into()),
            FeaturesPerSplit::Fraction(x) => FpsRepr::Fraction(x),
            FeaturesPerSplit::Count(c) => FpsRepr::Count(c as u64),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeaturesPerSplit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match FpsRepr::deserialize(d)? {
            FpsRepr::Count(c) => Ok(FeaturesPerSplit::Count(c as usize)),
            FpsRepr::Fraction(x) => Ok(FeaturesPerSplit::Fraction(x)),
            FpsRepr::Name(n) if n == "third" => Ok(FeaturesPerSplit::Third),
            FpsRepr::Name(n) => Err(serde::de::Error::custom(format!(
                "features_per_split `{n}`: expected \"third\", a fraction or a count"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: FeaturesPerSplit,
    pub bootstrap: bool,
    pub rng_seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 300,
            max_depth: None,
            min_samples_leaf: 2,
            features_per_split: FeaturesPerSplit::Third,
            bootstrap: true,
            rng_seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), ForestError> {
        if self.n_trees == 0 {
            return Err(ForestError::Config("n_trees must be >= 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(ForestError::Config("min_samples_leaf must be >= 1".into()));
        }
        self.features_per_split
            .validate()
            .map_err(ForestError::Config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedForest {
    pub trees: Vec<Tree>,
    /// Normalized mean decrease in impurity; sums to 1.
    pub feature_importances: Vec<f64>,
    pub n_features: usize,
}

impl TrainedForest {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, ForestError> {
        x.iter()
            .map(|r| {
                if r.len() != self.n_features {
                    Err(ForestError::Dimension {
                        expected: self.n_features,
                        got: r.len(),
                    })
                } else {
                    Ok(self.predict_row(r))
                }
            })
            .collect()
    }
}

pub fn predict(forest: &TrainedForest, x: &[Vec<f64>]) -> Result<Vec<f64>, ForestError> {
    forest.predict(x)
}

/// Row-major `x` transposed to column-major.
pub(crate) fn columns_of(x: &[Vec<f64>], n_features: usize) -> Vec<Vec<f64>> {
    (0..n_features)
        .map(|f| x.iter().map(|r| r[f]).collect())
        .collect()
}

pub fn train_forest(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &ForestConfig,
) -> Result<TrainedForest, ForestError> {
    cfg.validate()?;
    if x.is_empty() || y.is_empty() {
        return Err(ForestError::Empty);
    }
    if x.len() != y.len() {
        return Err(ForestError::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(ForestError::TooFewRows(x.len()));
    }
    let n_features = x[0].len();
    if n_features == 0 {
        return Err(ForestError::Empty);
    }
    if let Some(r) = x.iter().find(|r| r.len() != n_features) {
        return Err(ForestError::Dimension {
            expected: n_features,
            got: r.len(),
        });
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(ForestError::NonFinite);
    }
    let cols = columns_of(x, n_features);
    Ok(train_columns(&cols, y, cfg))
}

/// Training on validated column-major data.
pub(crate) fn train_columns(cols: &[Vec<f64>], y: &[f64], cfg: &ForestConfig) -> TrainedForest {
    let n = y.len();
    let n_features = cols.len();
    let params = tree::GrowParams {
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
        mtry: cfg.features_per_split.resolve(n_features),
    };
    let grown: Vec<(Tree, Vec<f64>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rng.set_stream(t as u64);
            let samples: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            tree::grow(cols, y, samples, &params, &mut rng)
        })
        .collect();
    let mut importance = vec![0.0; n_features];
    let mut contributing = 0usize;
    for (_, imp) in &grown {
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            contributing += 1;
            for (acc, v) in importance.iter_mut().zip(imp) {
                *acc += v / total;
            }
        }
    }
    if contributing == 0 {
        importance = vec![1.0 / n_features as f64; n_features];
    } else {
        let s: f64 = importance.iter().sum();
        importance.iter_mut().for_each(|v| *v /= s);
    }
    TrainedForest {
        trees: grown.into_iter().map(|(t, _)| t).collect(),
        feature_importances: importance,
        n_features,
    }
}
