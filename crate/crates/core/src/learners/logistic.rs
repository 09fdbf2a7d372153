//! L2-regularized logistic regression fit by batch gradient descent with a
//! backtracking line search.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::Dataset;
use crate::learners::sigmoid;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub standardize: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub scaling: Option<(Vec<f64>, Vec<f64>)>, // (means, stds)
}

/// Mean log-loss plus (λ/2)(‖w‖² + b²); the intercept is penalized too so
/// single-class data has a finite optimum.
pub fn logistic_loss(weights: &[f64], bias: f64, data: &Dataset, lambda: f64) -> f64 {
    let n = data.len() as f64;
    let mut loss = 0.0;
    for inst in data.instances() {
        let z = bias + dot(weights, &inst.values);
        let y = if inst.label.is_sick() { 1.0 } else { 0.0 };
        // log(1+e^z) - y z, computed stably
        loss += if z > 0.0 {
            z + (-z).exp().ln_1p() - y * z
        } else {
            z.exp().ln_1p() - y * z
        };
    }
    loss / n + 0.5 * lambda * (dot(weights, weights) + bias * bias)
}

/// Analytic gradient of [`logistic_loss`] in (weights, bias).
pub fn logistic_grad(weights: &[f64], bias: f64, data: &Dataset, lambda: f64) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for inst in data.instances() {
        let z = bias + dot(weights, &inst.values);
        let y = if inst.label.is_sick() { 1.0 } else { 0.0 };
        let err = sigmoid(z) - y;
        for (g, &x) in gw.iter_mut().zip(&inst.values) {
            *g += err * x;
        }
        gb += err;
    }
    for (g, &w) in gw.iter_mut().zip(weights) {
        *g = *g / n + lambda * w;
    }
    (gw, gb / n + lambda * bias)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn column_scaling(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = data.len() as f64;
    let d = data.n_features();
    let mut means = vec![0.0; d];
    for inst in data.instances() {
        for (m, &v) in means.iter_mut().zip(&inst.values) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut stds = vec![0.0; d];
    for inst in data.instances() {
        for ((s, m), &v) in stds.iter_mut().zip(&means).zip(&inst.values) {
            *s += (v - *m) * (v - *m);
        }
    }
    for s in stds.iter_mut() {
        *s = (*s / n).sqrt().max(1e-9);
    }
    (means, stds)
}

fn scaled(data: &Dataset, means: &[f64], stds: &[f64]) -> Dataset {
    let mut out = Dataset::new(data.schema_id());
    for inst in data.instances() {
        let values = inst
            .values
            .iter()
            .zip(means.iter().zip(stds))
            .map(|(&v, (m, s))| (v - m) / s)
            .collect();
        out.push(
            crate::features::FeatureVector {
                schema_id: data.schema_id().to_string(),
                values,
            },
            inst.label,
            inst.id.clone(),
        )
        .expect("same schema");
    }
    out
}

pub(crate) fn train(data: &Dataset, opts: Options) -> Result<LogisticModel> {
    let (work, scaling) = if opts.standardize {
        let (means, stds) = column_scaling(data);
        (scaled(data, &means, &stds), Some((means, stds)))
    } else {
        (data.clone(), None)
    };

    let d = work.n_features();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut loss = logistic_loss(&w, b, &work, opts.lambda);
    for _ in 0..opts.max_iter {
        let (gw, gb) = logistic_grad(&w, b, &work, opts.lambda);
        let gnorm2 = dot(&gw, &gw) + gb * gb;
        if gnorm2.sqrt() < opts.tol {
            break;
        }
        // Armijo backtracking
        let mut step = 1.0;
        let mut advanced = false;
        for _ in 0..50 {
            let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - step * gi).collect();
            let cand_b = b - step * gb;
            let cand_loss = logistic_loss(&cand_w, cand_b, &work, opts.lambda);
            if cand_loss <= loss - 1e-4 * step * gnorm2 {
                w = cand_w;
                b = cand_b;
                loss = cand_loss;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    Ok(LogisticModel {
        weights: w,
        bias: b,
        scaling,
    })
}

pub(crate) fn predict(model: &LogisticModel, values: &[f64]) -> f64 {
    let z = match &model.scaling {
        None => model.bias + dot(&model.weights, values),
        Some((means, stds)) => {
            let mut z = model.bias;
            for ((&w, &v), (m, s)) in model
                .weights
                .iter()
                .zip(values)
                .zip(means.iter().zip(stds))
            {
                z += w * (v - m) / s;
            }
            z
        }
    };
    sigmoid(z)
}
