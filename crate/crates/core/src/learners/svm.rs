//! Linear SVM: primal sub-gradient descent on the hinge loss, with a
//! two-parameter sigmoid fit on the training margins for probabilities.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::Dataset;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub lambda: f64,
    pub epochs: usize,
    pub standardize: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub platt_a: f64,
    pub platt_b: f64,
    pub scaling: Option<(Vec<f64>, Vec<f64>)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sigmoid calibration of decision values with smoothed targets; Newton
/// iterations with backtracking on the cross-entropy objective.
fn platt_fit(scores: &[f64], sick: &[bool]) -> (f64, f64) {
    let n = scores.len();
    let prior1 = sick.iter().filter(|s| **s).count() as f64;
    let prior0 = n as f64 - prior1;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let targets: Vec<f64> = sick.iter().map(|s| if *s { hi } else { lo }).collect();

    let objective = |a: f64, b: f64| -> f64 {
        let mut obj = 0.0;
        for (&f, &t) in scores.iter().zip(&targets) {
            let fapb = f * a + b;
            obj += if fapb >= 0.0 {
                t * fapb + (-fapb).exp().ln_1p()
            } else {
                (t - 1.0) * fapb + fapb.exp().ln_1p()
            };
        }
        obj
    };

    let mut a = 0.0;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let mut fval = objective(a, b);
    const SIGMA: f64 = 1e-12;
    for _ in 0..100 {
        let mut h11 = SIGMA;
        let mut h22 = SIGMA;
        let mut h21 = 0.0;
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        for (&f, &t) in scores.iter().zip(&targets) {
            let fapb = f * a + b;
            let (p, q) = if fapb >= 0.0 {
                let e = (-fapb).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = fapb.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = t - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-10 {
            let na = a + step * da;
            let nb = b + step * db;
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    (a, b)
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

pub(crate) fn train(data: &Dataset, opts: Options) -> Result<SvmModel> {
    let n = data.len();
    let d = data.n_features();
    let scaling = if opts.standardize {
        Some(column_scaling(data))
    } else {
        None
    };
    let features: Vec<Vec<f64>> = data
        .instances()
        .iter()
        .map(|inst| match &scaling {
            None => inst.values.clone(),
            Some((means, stds)) => inst
                .values
                .iter()
                .zip(means.iter().zip(stds))
                .map(|(&v, (m, s))| (v - m) / s)
                .collect(),
        })
        .collect();
    let targets: Vec<f64> = data
        .instances()
        .iter()
        .map(|i| if i.label.is_sick() { 1.0 } else { -1.0 })
        .collect();

    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let nf = n as f64;
    for t in 1..=opts.epochs {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (x, &y) in features.iter().zip(&targets) {
            if y * (dot(&w, x) + b) < 1.0 {
                for (g, &xv) in gw.iter_mut().zip(x) {
                    *g -= y * xv;
                }
                gb -= y;
            }
        }
        let eta = 1.0 / (opts.lambda * t as f64);
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= eta * (opts.lambda * *wi + g / nf);
        }
        b -= eta * gb / nf;
    }

    let margins: Vec<f64> = features.iter().map(|x| dot(&w, x) + b).collect();
    let sick: Vec<bool> = data.instances().iter().map(|i| i.label.is_sick()).collect();
    let (platt_a, platt_b) = platt_fit(&margins, &sick);
    Ok(SvmModel {
        weights: w,
        bias: b,
        platt_a,
        platt_b,
        scaling,
    })
}

pub(crate) fn predict(model: &SvmModel, values: &[f64]) -> f64 {
    let margin = match &model.scaling {
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
    let fapb = margin * model.platt_a + model.platt_b;
    if fapb >= 0.0 {
        let e = (-fapb).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + fapb.exp())
    }
}
