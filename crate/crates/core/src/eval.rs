//! Metrics and the experiment harness: ROC/AUC (two formulations,
//! cross-checked), F1/accuracy/confusion, stratified k-fold and repeated
//! cross-validation.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, Label};
use crate::learners::{predict, train, AlgorithmSpec};
use crate::seed::{derive_u64, stream_rng};

/// Binary confusion counts; rows are true labels, columns predictions,
/// sick is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_neg: u64,
    pub false_pos: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn new(true_pos: u64, false_neg: u64, false_pos: u64, true_neg: u64) -> Self {
        ConfusionMatrix {
            true_pos,
            false_neg,
            false_pos,
            true_neg,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_neg + self.false_pos + self.true_neg
    }

    pub fn accuracy(&self) -> f64 {
        (self.true_pos + self.true_neg) as f64 / self.total() as f64
    }

    pub fn precision(&self) -> f64 {
        let denom = self.true_pos + self.false_pos;
        if denom == 0 {
            0.0
        } else {
            self.true_pos as f64 / denom as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let denom = self.true_pos + self.false_neg;
        if denom == 0 {
            0.0
        } else {
            self.true_pos as f64 / denom as f64
        }
    }

    /// F1 = 2PR/(P+R), defined as 0 when P+R = 0.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.true_pos + self.false_neg + self.false_pos;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.true_pos as f64 / denom as f64
        }
    }
}

/// (false-positive-rate, true-positive-rate) points from (0,0) to (1,1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

/// ROC by sweeping thresholds over the distinct scores (ties grouped) and
/// the trapezoidal area under it.
pub fn roc_and_auc(scores: &[f64], labels: &[Label]) -> Result<(RocCurve, f64)> {
    check_scores(scores, labels)?;
    let pos = labels.iter().filter(|l| l.is_sick()).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]].is_sick() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg, tp as f64 / pos));
    }
    let mut auc = 0.0;
    for pair in points.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        auc += (x1 - x0) * (y0 + y1) / 2.0;
    }
    Ok((RocCurve { points }, auc))
}

/// AUC as the probability that a random sick instance outscores a random
/// not-sick one, ties counting one half (average-rank formulation).
pub fn auc_pairwise(scores: &[f64], labels: &[Label]) -> Result<f64> {
    check_scores(scores, labels)?;
    let n = scores.len();
    let pos = labels.iter().filter(|l| l.is_sick()).count();
    let neg = n - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    // average ranks over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..j] {
            if labels[idx].is_sick() {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let pos_f = pos as f64;
    let u = rank_sum_pos - pos_f * (pos_f + 1.0) / 2.0;
    Ok(u / (pos_f * neg as f64))
}

fn check_scores(scores: &[f64], labels: &[Label]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Validation("scores/labels length mismatch".into()));
    }
    if scores.is_empty() {
        return Err(Error::InsufficientData("no scores".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Validation("NaN score".into()));
    }
    Ok(())
}

/// Threshold scores at `threshold` (strictly greater = predicted sick).
pub fn f1_accuracy_confusion(
    scores: &[f64],
    labels: &[Label],
    threshold: f64,
) -> (f64, f64, ConfusionMatrix) {
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (&s, l) in scores.iter().zip(labels) {
        let predicted_sick = s > threshold;
        match (l.is_sick(), predicted_sick) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_neg += 1,
            (false, true) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
        }
    }
    (cm.f1(), cm.accuracy(), cm)
}

/// Everything a single experiment reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub confusion: ConfusionMatrix,
    pub threshold: f64,
    /// Held-out score per instance: (instance id, label, p_sick).
    pub scores: Vec<(String, Label, f64)>,
}

impl EvalReport {
    pub fn from_scores(
        ids: &[String],
        labels: &[Label],
        scores: &[f64],
        threshold: f64,
    ) -> Result<EvalReport> {
        let auc = auc_pairwise(scores, labels)?;
        let (f1, accuracy, confusion) = f1_accuracy_confusion(scores, labels, threshold);
        Ok(EvalReport {
            auc,
            accuracy,
            f1,
            confusion,
            threshold,
            scores: ids
                .iter()
                .zip(labels)
                .zip(scores)
                .map(|((id, l), s)| (id.clone(), *l, *s))
                .collect(),
        })
    }
}

/// Stratified fold ids (0..k) per instance: within each class, instances
/// are shuffled and dealt round-robin, so per-fold class counts differ by
/// at most one.
pub fn stratified_fold_assignment(labels: &[Label], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config("k must be at least 2".into()));
    }
    if k > labels.len() {
        return Err(Error::Config(format!(
            "k = {k} exceeds the {} instances",
            labels.len()
        )));
    }
    let mut assignment = vec![0usize; labels.len()];
    for (class_idx, class) in [Label::Sick, Label::NotSick].into_iter().enumerate() {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        let mut rng = stream_rng(seed, "eval", "stratify", class_idx as u64);
        members.shuffle(&mut rng);
        for (j, idx) in members.into_iter().enumerate() {
            assignment[idx] = j % k;
        }
    }
    Ok(assignment)
}

/// Every instance scored exactly once by a model that never saw it.
/// Returns held-out p_sick in dataset order.
pub fn k_fold_cv(data: &Dataset, k: usize, spec: &AlgorithmSpec, seed: u64) -> Result<Vec<f64>> {
    if !data.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let labels = data.labels();
    let assignment = stratified_fold_assignment(&labels, k, seed)?;
    let fold_results: Vec<Result<Vec<(usize, f64)>>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train_idx: Vec<usize> = (0..data.len())
                .filter(|i| assignment[*i] != fold)
                .collect();
            let test_idx: Vec<usize> =
                (0..data.len()).filter(|i| assignment[*i] == fold).collect();
            if train_idx.is_empty() || test_idx.is_empty() {
                return Ok(Vec::new());
            }
            let model = train(spec, &data.select(&train_idx))?;
            let mut scored = Vec::with_capacity(test_idx.len());
            for i in test_idx {
                scored.push((i, predict(&model, &data.vector(i))?.p_sick));
            }
            Ok(scored)
        })
        .collect();
    let mut scores = vec![f64::NAN; data.len()];
    for fold in fold_results {
        for (i, p) in fold? {
            scores[i] = p;
        }
    }
    debug_assert!(scores.iter().all(|s| !s.is_nan()));
    Ok(scores)
}

/// Leave-one-out: k-fold with one fold per instance.
pub fn loocv(data: &Dataset, spec: &AlgorithmSpec, seed: u64) -> Result<Vec<f64>> {
    k_fold_cv(data, data.len(), spec, seed)
}

/// One AUC per repeat, fold assignments re-randomized from derived seeds.
pub fn repeated_cv_auc_distribution(
    data: &Dataset,
    spec: &AlgorithmSpec,
    repeats: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let labels = data.labels();
    (0..repeats)
        .map(|r| {
            let fold_seed = derive_u64(seed, "eval", "cv_repeat", r as u64);
            let scores = k_fold_cv(data, k, spec, fold_seed)?;
            auc_pairwise(&scores, &labels)
        })
        .collect()
}
