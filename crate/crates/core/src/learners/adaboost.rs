//! AdaBoost over decision stumps; probability is the logistic of the
//! additive margin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::learners::sigmoid;
use crate::learners::stump::{best_weighted_stump, FeatureOrder, Stump};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct AdaBoostModel {
    pub rounds: Vec<(f64, Stump)>,
}

pub(crate) fn train(data: &Dataset, rounds: usize) -> Result<AdaBoostModel> {
    if rounds == 0 {
        return Err(Error::Hyperparameter {
            kind: "adaboost".into(),
            detail: "rounds must be at least 1".into(),
        });
    }
    let n = data.len();
    let targets: Vec<f64> = data
        .instances()
        .iter()
        .map(|i| if i.label.is_sick() { 1.0 } else { -1.0 })
        .collect();
    let order = FeatureOrder::new(data);
    let mut weights = vec![1.0 / n as f64; n];
    let mut fitted = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let (stump, err) = best_weighted_stump(data, &order, &weights, &targets);
        if err >= 0.5 - 1e-12 {
            break;
        }
        let clamped = err.clamp(1e-10, 1.0 - 1e-10);
        let alpha = 0.5 * ((1.0 - clamped) / clamped).ln();
        fitted.push((alpha, stump));
        if err <= 1e-10 {
            break;
        }
        let mut total = 0.0;
        for ((w, inst), &y) in weights
            .iter_mut()
            .zip(data.instances())
            .zip(&targets)
        {
            *w *= (-alpha * y * stump.vote(&inst.values)).exp();
            total += *w;
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
    }
    Ok(AdaBoostModel { rounds: fitted })
}

pub(crate) fn predict(model: &AdaBoostModel, values: &[f64]) -> f64 {
    let margin: f64 = model
        .rounds
        .iter()
        .map(|(alpha, stump)| alpha * stump.vote(values))
        .sum();
    sigmoid(margin)
}
