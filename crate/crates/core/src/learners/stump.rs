//! Shared decision-stump machinery for the boosting learners.

use serde::{Deserialize, Serialize};

use crate::features::Dataset;

/// Per-feature instance orderings, computed once per training set so each
/// boosting round scans presorted columns.
pub(crate) struct FeatureOrder {
    orders: Vec<Vec<u32>>,
}

impl FeatureOrder {
    pub fn new(data: &Dataset) -> Self {
        let n = data.len();
        let orders = (0..data.n_features())
            .map(|f| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| {
                    data.instances()[a as usize].values[f]
                        .partial_cmp(&data.instances()[b as usize].values[f])
                        .unwrap()
                });
                idx
            })
            .collect();
        FeatureOrder { orders }
    }
}

/// A classification stump: raw vote is -1 for values <= threshold and +1
/// above it, multiplied by the polarity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub(crate) struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
}

impl Stump {
    pub fn vote(&self, values: &[f64]) -> f64 {
        let raw = if values[self.feature] <= self.threshold {
            -1.0
        } else {
            1.0
        };
        raw * self.polarity as f64
    }
}

/// Minimum-weighted-error stump over all features, thresholds and both
/// polarities. `targets` are ±1 and `weights` sum to 1. Ties keep the first
/// candidate in (feature, threshold, +polarity) scan order. The sweep
/// includes a below-all-values threshold, so a constant-output stump is
/// always available.
pub(crate) fn best_weighted_stump(
    data: &Dataset,
    order: &FeatureOrder,
    weights: &[f64],
    targets: &[f64],
) -> (Stump, f64) {
    let total: f64 = weights.iter().sum();
    let total_pos: f64 = weights
        .iter()
        .zip(targets)
        .filter(|(_, &y)| y > 0.0)
        .map(|(w, _)| *w)
        .sum();
    let mut best: Option<(Stump, f64)> = None;
    for (feature, idx) in order.orders.iter().enumerate() {
        let value = |pos: usize| data.instances()[idx[pos] as usize].values[feature];
        // prefix empty: everything predicted +1 by +polarity
        let mut err_plus = total - total_pos;
        let consider = |thr: f64, err_plus: f64, best: &mut Option<(Stump, f64)>| {
            for (polarity, err) in [(1i8, err_plus), (-1i8, total - err_plus)] {
                if best.as_ref().map_or(true, |(_, e)| err < *e) {
                    *best = Some((
                        Stump {
                            feature,
                            threshold: thr,
                            polarity,
                        },
                        err,
                    ));
                }
            }
        };
        let below = if idx.is_empty() { 0.0 } else { value(0) } - 1.0;
        consider(below, err_plus, &mut best);
        for pos in 0..idx.len() {
            let i = idx[pos] as usize;
            // moving i into the "<= threshold" side flips its vote to -1
            err_plus += if targets[i] > 0.0 {
                weights[i]
            } else {
                -weights[i]
            };
            if pos + 1 < idx.len() {
                let v = value(pos);
                let next = value(pos + 1);
                if next == v {
                    continue;
                }
                consider((v + next) / 2.0, err_plus, &mut best);
            }
        }
    }
    best.expect("dataset has at least one feature")
}

/// A regression stump fit by weighted least squares.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub(crate) struct RegStump {
    pub feature: usize,
    pub threshold: f64,
    pub left_value: f64,
    pub right_value: f64,
}

impl RegStump {
    pub fn value(&self, values: &[f64]) -> f64 {
        if values[self.feature] <= self.threshold {
            self.left_value
        } else {
            self.right_value
        }
    }
}

/// Minimum weighted-SSE stump for responses `z` with weights `w`.
/// A below-all-values threshold (both sides the global weighted mean)
/// guarantees a fallback on constant features.
pub(crate) fn best_regression_stump(
    data: &Dataset,
    order: &FeatureOrder,
    w: &[f64],
    z: &[f64],
) -> RegStump {
    let w_total: f64 = w.iter().sum();
    let wz_total: f64 = w.iter().zip(z).map(|(a, b)| a * b).sum();
    let global_mean = wz_total / w_total;
    // SSE = Σwz² - Σ(side)² / w(side); the Σwz² term is constant, so
    // maximize the explained part
    let baseline = RegStump {
        feature: 0,
        threshold: f64::NEG_INFINITY,
        left_value: global_mean,
        right_value: global_mean,
    };
    let base_explained = wz_total * wz_total / w_total;
    let mut best: (RegStump, f64) = (baseline, base_explained);
    for (feature, idx) in order.orders.iter().enumerate() {
        let value = |pos: usize| data.instances()[idx[pos] as usize].values[feature];
        let mut lw = 0.0;
        let mut lwz = 0.0;
        for pos in 0..idx.len().saturating_sub(1) {
            let i = idx[pos] as usize;
            lw += w[i];
            lwz += w[i] * z[i];
            let v = value(pos);
            let next = value(pos + 1);
            if next == v {
                continue;
            }
            let rw = w_total - lw;
            let rwz = wz_total - lwz;
            if lw <= 0.0 || rw <= 0.0 {
                continue;
            }
            let explained = lwz * lwz / lw + rwz * rwz / rw;
            // strictly-greater keeps the first candidate on ties
            if explained > best.1 + 1e-15 {
                best = (
                    RegStump {
                        feature,
                        threshold: (v + next) / 2.0,
                        left_value: lwz / lw,
                        right_value: rwz / rw,
                    },
                    explained,
                );
            }
        }
    }
    best.0
}
