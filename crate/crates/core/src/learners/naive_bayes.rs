//! Naive Bayes: Bernoulli event model on binary features, Gaussian on
//! everything else, Laplace-smoothed.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::Dataset;
use crate::learners::sigmoid;

const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) enum FeatureModel {
    Bernoulli {
        p_one_sick: f64,
        p_one_not: f64,
    },
    Gaussian {
        mean_sick: f64,
        var_sick: f64,
        mean_not: f64,
        var_not: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct NaiveBayesModel {
    log_prior_sick: f64,
    log_prior_not: f64,
    features: FeatureModelList,
}

type FeatureModelList = Vec<FeatureModel>;

fn moments(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, VAR_FLOOR);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.max(VAR_FLOOR))
}

pub(crate) fn train(data: &Dataset, alpha: f64) -> Result<NaiveBayesModel> {
    let n = data.len() as f64;
    let n_sick = data.instances().iter().filter(|i| i.label.is_sick()).count() as f64;
    let n_not = n - n_sick;
    // add-one smoothed class prior: (n_c + 1) / (n + 2)
    let log_prior_sick = ((n_sick + 1.0) / (n + 2.0)).ln();
    let log_prior_not = ((n_not + 1.0) / (n + 2.0)).ln();

    let d = data.n_features();
    let mut features = Vec::with_capacity(d);
    for j in 0..d {
        let column: Vec<(f64, bool)> = data
            .instances()
            .iter()
            .map(|i| (i.values[j], i.label.is_sick()))
            .collect();
        let binary = column.iter().all(|(v, _)| *v == 0.0 || *v == 1.0);
        if binary {
            let ones_sick = column.iter().filter(|(v, s)| *v == 1.0 && *s).count() as f64;
            let ones_not = column.iter().filter(|(v, s)| *v == 1.0 && !*s).count() as f64;
            features.push(FeatureModel::Bernoulli {
                p_one_sick: (ones_sick + alpha) / (n_sick + 2.0 * alpha),
                p_one_not: (ones_not + alpha) / (n_not + 2.0 * alpha),
            });
        } else {
            let sick_vals: Vec<f64> =
                column.iter().filter(|(_, s)| *s).map(|(v, _)| *v).collect();
            let not_vals: Vec<f64> =
                column.iter().filter(|(_, s)| !*s).map(|(v, _)| *v).collect();
            let all_vals: Vec<f64> = column.iter().map(|(v, _)| *v).collect();
            let pooled = moments(&all_vals);
            // a class with no data falls back to the pooled moments, which
            // cancels out of the likelihood ratio
            let (mean_sick, var_sick) = if sick_vals.is_empty() {
                pooled
            } else {
                moments(&sick_vals)
            };
            let (mean_not, var_not) = if not_vals.is_empty() {
                pooled
            } else {
                moments(&not_vals)
            };
            features.push(FeatureModel::Gaussian {
                mean_sick,
                var_sick,
                mean_not,
                var_not,
            });
        }
    }
    Ok(NaiveBayesModel {
        log_prior_sick,
        log_prior_not,
        features,
    })
}

fn gauss_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((x - mean) * (x - mean) / var + var.ln() + (2.0 * std::f64::consts::PI).ln())
}

pub(crate) fn predict(model: &NaiveBayesModel, values: &[f64]) -> f64 {
    let mut log_sick = model.log_prior_sick;
    let mut log_not = model.log_prior_not;
    for (fm, &v) in model.features.iter().zip(values) {
        match fm {
            FeatureModel::Bernoulli { p_one_sick, p_one_not } => {
                // any nonzero value counts as presence
                if v != 0.0 {
                    log_sick += p_one_sick.ln();
                    log_not += p_one_not.ln();
                } else {
                    log_sick += (1.0 - p_one_sick).ln();
                    log_not += (1.0 - p_one_not).ln();
                }
            }
            FeatureModel::Gaussian { mean_sick, var_sick, mean_not, var_not } => {
                log_sick += gauss_log_pdf(v, *mean_sick, *var_sick);
                log_not += gauss_log_pdf(v, *mean_not, *var_not);
            }
        }
    }
    sigmoid(log_sick - log_not)
}
