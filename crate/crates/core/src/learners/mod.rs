//! From-scratch classifiers behind one train/predict contract.
//!
//! Every algorithm tolerates single-class training data, is deterministic
//! given its seed, and emits a probability of the sick class.

mod adaboost;
mod logistic;
mod logitboost;
mod naive_bayes;
mod stump;
mod svm;
mod tree;
mod vote;

pub use logistic::{logistic_grad, logistic_loss};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureVector};

/// The classification algorithms the pipeline knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    NaiveBayes,
    LogisticRegression,
    DecisionTree,
    RandomForest,
    LinearSvm,
    AdaBoost,
    LogitBoost,
    WeightedVote,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::NaiveBayes => "naive_bayes",
            AlgorithmKind::LogisticRegression => "logistic_regression",
            AlgorithmKind::DecisionTree => "decision_tree",
            AlgorithmKind::RandomForest => "random_forest",
            AlgorithmKind::LinearSvm => "linear_svm",
            AlgorithmKind::AdaBoost => "adaboost",
            AlgorithmKind::LogitBoost => "logitboost",
            AlgorithmKind::WeightedVote => "weighted_vote",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "naive_bayes" => AlgorithmKind::NaiveBayes,
            "logistic_regression" => AlgorithmKind::LogisticRegression,
            "decision_tree" => AlgorithmKind::DecisionTree,
            "random_forest" => AlgorithmKind::RandomForest,
            "linear_svm" => AlgorithmKind::LinearSvm,
            "adaboost" => AlgorithmKind::AdaBoost,
            "logitboost" => AlgorithmKind::LogitBoost,
            "weighted_vote" => AlgorithmKind::WeightedVote,
            other => {
                return Err(Error::Config(format!("unknown algorithm `{other}`")));
            }
        })
    }

    fn allowed_params(self) -> &'static [&'static str] {
        match self {
            AlgorithmKind::NaiveBayes => &["alpha"],
            AlgorithmKind::LogisticRegression => &["lambda", "tol", "max_iter", "standardize"],
            AlgorithmKind::DecisionTree => &["min_leaf", "prune"],
            AlgorithmKind::RandomForest => &["n_trees", "min_leaf"],
            AlgorithmKind::LinearSvm => &["lambda", "epochs", "standardize"],
            AlgorithmKind::AdaBoost => &["rounds"],
            AlgorithmKind::LogitBoost => &["rounds", "z_clamp"],
            AlgorithmKind::WeightedVote => &[],
        }
    }
}

/// A typed hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
}

/// Typed hyperparameter map; unknown keys are rejected at train time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params(pub BTreeMap<String, ParamValue>);

impl Params {
    pub fn set(mut self, key: &str, value: ParamValue) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    fn get_f64(&self, kind: AlgorithmKind, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Float(v)) if v.is_finite() => Ok(*v),
            Some(ParamValue::Int(v)) => Ok(*v as f64),
            Some(other) => Err(Error::Hyperparameter {
                kind: kind.name().into(),
                detail: format!("{key} must be a finite number, got {other:?}"),
            }),
        }
    }

    fn get_usize(&self, kind: AlgorithmKind, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(v)) if *v >= 0 => Ok(*v as usize),
            Some(other) => Err(Error::Hyperparameter {
                kind: kind.name().into(),
                detail: format!("{key} must be a non-negative integer, got {other:?}"),
            }),
        }
    }

    fn get_bool(&self, kind: AlgorithmKind, key: &str, default: bool) -> Result<bool> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Bool(v)) => Ok(*v),
            Some(other) => Err(Error::Hyperparameter {
                kind: kind.name().into(),
                detail: format!("{key} must be a boolean, got {other:?}"),
            }),
        }
    }
}

/// Which algorithm to train, with what hyperparameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub rng_seed: u64,
}

impl AlgorithmSpec {
    pub fn new(kind: AlgorithmKind) -> Self {
        AlgorithmSpec {
            kind,
            params: Params::default(),
            rng_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        let allowed = self.kind.allowed_params();
        for key in self.params.0.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Hyperparameter {
                    kind: self.kind.name().into(),
                    detail: format!("unknown hyperparameter `{key}`"),
                });
            }
        }
        Ok(())
    }
}

/// A learner's output: the probability that the instance is sick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub p_sick: f64,
}

impl ClassDistribution {
    pub fn new(p_sick: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&p_sick), "p_sick = {p_sick}");
        ClassDistribution { p_sick }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) enum ModelKind {
    NaiveBayes(naive_bayes::NaiveBayesModel),
    Logistic(logistic::LogisticModel),
    Tree(tree::TreeModel),
    Forest(tree::ForestModel),
    Svm(svm::SvmModel),
    AdaBoost(adaboost::AdaBoostModel),
    LogitBoost(logitboost::LogitBoostModel),
    Vote(vote::VoteModel),
}

/// A fitted model plus the schema of the features it was trained on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Model {
    format_version: u32,
    schema_id: String,
    n_features: usize,
    pub(crate) inner: ModelKind,
}

const MODEL_FORMAT_VERSION: u32 = 1;

impl Model {
    pub fn schema_id(&self) -> &str {
        &self.schema_id
    }

    pub fn kind(&self) -> AlgorithmKind {
        match &self.inner {
            ModelKind::NaiveBayes(_) => AlgorithmKind::NaiveBayes,
            ModelKind::Logistic(_) => AlgorithmKind::LogisticRegression,
            ModelKind::Tree(_) => AlgorithmKind::DecisionTree,
            ModelKind::Forest(_) => AlgorithmKind::RandomForest,
            ModelKind::Svm(_) => AlgorithmKind::LinearSvm,
            ModelKind::AdaBoost(_) => AlgorithmKind::AdaBoost,
            ModelKind::LogitBoost(_) => AlgorithmKind::LogitBoost,
            ModelKind::Vote(_) => AlgorithmKind::WeightedVote,
        }
    }

    /// Serialize to a versioned JSON artifact.
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: Model =
            serde_json::from_str(&contents).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }
}

/// Fit `spec` on `data`. Deterministic given `spec.rng_seed`.
pub fn train(spec: &AlgorithmSpec, data: &Dataset) -> Result<Model> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::InsufficientData("cannot train on an empty dataset".into()));
    }
    let inner = match spec.kind {
        AlgorithmKind::NaiveBayes => ModelKind::NaiveBayes(naive_bayes::train(
            data,
            spec.params.get_f64(spec.kind, "alpha", 1.0)?,
        )?),
        AlgorithmKind::LogisticRegression => ModelKind::Logistic(logistic::train(
            data,
            logistic::Options {
                lambda: spec.params.get_f64(spec.kind, "lambda", 1e-4)?,
                tol: spec.params.get_f64(spec.kind, "tol", 1e-6)?,
                max_iter: spec.params.get_usize(spec.kind, "max_iter", 10_000)?,
                standardize: spec.params.get_bool(spec.kind, "standardize", false)?,
            },
        )?),
        AlgorithmKind::DecisionTree => ModelKind::Tree(tree::train_tree(
            data,
            tree::TreeOptions {
                min_leaf: spec.params.get_usize(spec.kind, "min_leaf", 2)?,
                prune: spec.params.get_bool(spec.kind, "prune", false)?,
            },
        )?),
        AlgorithmKind::RandomForest => ModelKind::Forest(tree::train_forest(
            data,
            spec.params.get_usize(spec.kind, "n_trees", 100)?,
            spec.params.get_usize(spec.kind, "min_leaf", 2)?,
            spec.rng_seed,
        )?),
        AlgorithmKind::LinearSvm => ModelKind::Svm(svm::train(
            data,
            svm::Options {
                lambda: spec.params.get_f64(spec.kind, "lambda", 1e-3)?,
                epochs: spec.params.get_usize(spec.kind, "epochs", 10_000)?,
                standardize: spec.params.get_bool(spec.kind, "standardize", false)?,
            },
        )?),
        AlgorithmKind::AdaBoost => ModelKind::AdaBoost(adaboost::train(
            data,
            spec.params.get_usize(spec.kind, "rounds", 50)?,
        )?),
        AlgorithmKind::LogitBoost => ModelKind::LogitBoost(logitboost::train(
            data,
            spec.params.get_usize(spec.kind, "rounds", 50)?,
            spec.params.get_f64(spec.kind, "z_clamp", 4.0)?,
        )?),
        AlgorithmKind::WeightedVote => ModelKind::Vote(vote::train(data)?),
    };
    Ok(Model {
        format_version: MODEL_FORMAT_VERSION,
        schema_id: data.schema_id().to_string(),
        n_features: data.n_features(),
        inner,
    })
}

/// Score one feature vector. Pure function of (model, vector).
pub fn predict(model: &Model, fv: &FeatureVector) -> Result<ClassDistribution> {
    if fv.schema_id != model.schema_id {
        return Err(Error::SchemaMismatch {
            expected: model.schema_id.clone(),
            got: fv.schema_id.clone(),
        });
    }
    if fv.values.len() != model.n_features {
        return Err(Error::Validation(format!(
            "expected {} features, got {}",
            model.n_features,
            fv.values.len()
        )));
    }
    let p = match &model.inner {
        ModelKind::NaiveBayes(m) => naive_bayes::predict(m, &fv.values),
        ModelKind::Logistic(m) => logistic::predict(m, &fv.values),
        ModelKind::Tree(m) => tree::predict_tree(m, &fv.values),
        ModelKind::Forest(m) => tree::predict_forest(m, &fv.values),
        ModelKind::Svm(m) => svm::predict(m, &fv.values),
        ModelKind::AdaBoost(m) => adaboost::predict(m, &fv.values),
        ModelKind::LogitBoost(m) => logitboost::predict(m, &fv.values),
        ModelKind::Vote(m) => vote::predict(m, &fv.values),
    };
    debug_assert!(p.is_finite());
    Ok(ClassDistribution::new(p.clamp(0.0, 1.0)))
}

/// Weighted mean of voter probabilities: Σ wᵢpᵢ / Σ wᵢ.
pub fn weighted_vote(
    predictions: &[ClassDistribution],
    weights: &[f64],
) -> Result<ClassDistribution> {
    if predictions.is_empty() || predictions.len() != weights.len() {
        return Err(Error::Validation(
            "weighted_vote needs one non-negative weight per prediction".into(),
        ));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Validation("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Validation("weights must not all be zero".into()));
    }
    let p = predictions
        .iter()
        .zip(weights)
        .map(|(p, w)| p.p_sick * w)
        .sum::<f64>()
        / total;
    Ok(ClassDistribution::new(p.clamp(0.0, 1.0)))
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
