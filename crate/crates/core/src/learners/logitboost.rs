//! LogitBoost: rounds of weighted regression stumps on the working
//! response, with response clamping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::learners::sigmoid;
use crate::learners::stump::{best_regression_stump, FeatureOrder, RegStump};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct LogitBoostModel {
    pub stumps: Vec<RegStump>,
}

const WEIGHT_FLOOR: f64 = 1e-10;

pub(crate) fn train(data: &Dataset, rounds: usize, z_clamp: f64) -> Result<LogitBoostModel> {
    if rounds == 0 {
        return Err(Error::Hyperparameter {
            kind: "logitboost".into(),
            detail: "rounds must be at least 1".into(),
        });
    }
    if !(z_clamp > 0.0) {
        return Err(Error::Hyperparameter {
            kind: "logitboost".into(),
            detail: "z_clamp must be positive".into(),
        });
    }
    let n = data.len();
    let ystar: Vec<f64> = data
        .instances()
        .iter()
        .map(|i| if i.label.is_sick() { 1.0 } else { 0.0 })
        .collect();
    let order = FeatureOrder::new(data);
    let mut f = vec![0.0f64; n];
    let mut p = vec![0.5f64; n];
    let mut stumps = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut w = vec![0.0; n];
        let mut z = vec![0.0; n];
        for i in 0..n {
            let var = (p[i] * (1.0 - p[i])).max(WEIGHT_FLOOR);
            w[i] = var;
            z[i] = ((ystar[i] - p[i]) / var).clamp(-z_clamp, z_clamp);
        }
        let stump = best_regression_stump(data, &order, &w, &z);
        for (i, inst) in data.instances().iter().enumerate() {
            f[i] += 0.5 * stump.value(&inst.values);
            p[i] = sigmoid(2.0 * f[i]);
        }
        let flat = stump.left_value.abs() < 1e-12 && stump.right_value.abs() < 1e-12;
        stumps.push(stump);
        if flat {
            break;
        }
    }
    Ok(LogitBoostModel { stumps })
}

pub(crate) fn predict(model: &LogitBoostModel, values: &[f64]) -> f64 {
    let f: f64 = model.stumps.iter().map(|s| 0.5 * s.value(values)).sum();
    sigmoid(2.0 * f)
}
