//! Weighted voting over the feature columns, each treated as a voter's
//! probability; default weights are each voter's training-set AUC.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::auc_pairwise;
use crate::features::Dataset;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct VoteModel {
    pub weights: Vec<f64>,
}

pub(crate) fn train(data: &Dataset) -> Result<VoteModel> {
    let d = data.n_features();
    let labels = data.labels();
    let weights = if data.has_both_classes() {
        let mut w = Vec::with_capacity(d);
        for j in 0..d {
            let column: Vec<f64> = data.instances().iter().map(|i| i.values[j]).collect();
            w.push(auc_pairwise(&column, &labels)?);
        }
        if w.iter().sum::<f64>() <= 0.0 {
            vec![1.0; d]
        } else {
            w
        }
    } else {
        // AUC is undefined on one class; fall back to an unweighted vote
        vec![1.0; d]
    };
    Ok(VoteModel { weights })
}

pub(crate) fn predict(model: &VoteModel, values: &[f64]) -> f64 {
    let total: f64 = model.weights.iter().sum();
    let p = model
        .weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum::<f64>()
        / total;
    p.clamp(0.0, 1.0)
}
