//! Posting-rate anomaly signal: monthly tweet-count z-scores over a user's
//! eligible months, with an F1-optimal threshold fit by leave-one-out
//! cross-validation.

use serde::{Deserialize, Serialize};

use crate::corpus::{Cohort, YearMonth};
use crate::error::{Error, Result};
use crate::features::Label;
use crate::learners::sigmoid;

/// Months with fewer posts than this are discarded before scoring; it
/// avoids artifacts from users starting or abandoning the platform.
pub const MIN_MONTHLY_TWEETS: u32 = 10;

/// Per-month tweet counts for one user, contiguous over the study window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthlySeries {
    entries: Vec<(YearMonth, u32)>,
}

impl MonthlySeries {
    pub fn new(entries: Vec<(YearMonth, u32)>) -> Result<Self> {
        for pair in entries.windows(2) {
            if pair[0].0.next() != pair[1].0 {
                return Err(Error::Validation(format!(
                    "months {} and {} are not contiguous",
                    pair[0].0, pair[1].0
                )));
            }
        }
        Ok(MonthlySeries { entries })
    }

    pub fn for_user(cohort: &Cohort, user_id: &str) -> Result<Self> {
        if cohort.user(user_id).is_none() {
            return Err(Error::UnknownUser(user_id.to_string()));
        }
        MonthlySeries::new(cohort.monthly_counts(user_id))
    }

    pub fn entries(&self) -> &[(YearMonth, u32)] {
        &self.entries
    }

    /// Months meeting the posting floor, original order.
    pub fn eligible(&self) -> Vec<(YearMonth, u32)> {
        self.entries
            .iter()
            .copied()
            .filter(|(_, c)| *c >= MIN_MONTHLY_TWEETS)
            .collect()
    }
}

/// Convenience form of the eligibility filter.
pub fn eligible_months(series: &MonthlySeries) -> Vec<(YearMonth, u32)> {
    series.eligible()
}

/// |x - mean| / sd with the sample (n-1) standard deviation over `values`,
/// target included. A zero sd yields 0 when the target equals the mean and
/// the +infinity sentinel otherwise.
pub fn zscore_values(values: &[f64], target_index: usize) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "z-score needs at least 2 eligible months, got {n}"
        )));
    }
    if target_index >= n {
        return Err(Error::Validation("target index out of range".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let x = values[target_index];
    if sd == 0.0 {
        return Ok(if x == mean { 0.0 } else { f64::INFINITY });
    }
    Ok((x - mean).abs() / sd)
}

/// The z-score of one month's count against the user's eligible months.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyScore {
    pub z: f64,
}

/// Score `target` against all eligible months including itself.
pub fn zscore(series: &MonthlySeries, target: YearMonth) -> Result<AnomalyScore> {
    zscore_with_policy(series, target, true)
}

/// Score `target`, optionally excluding it from the mean/sd estimate (for
/// sensitivity analysis).
pub fn zscore_with_policy(
    series: &MonthlySeries,
    target: YearMonth,
    include_target: bool,
) -> Result<AnomalyScore> {
    let eligible = series.eligible();
    let target_pos = eligible.iter().position(|(m, _)| *m == target).ok_or_else(|| {
        Error::InsufficientData(format!("target month {target} is not eligible"))
    })?;
    let values: Vec<f64> = eligible.iter().map(|(_, c)| *c as f64).collect();
    if include_target {
        return Ok(AnomalyScore {
            z: zscore_values(&values, target_pos)?,
        });
    }
    let x = values[target_pos];
    let rest: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_pos)
        .map(|(_, v)| *v)
        .collect();
    if rest.len() < 2 {
        return Err(Error::InsufficientData(
            "excluding the target leaves fewer than 2 eligible months".into(),
        ));
    }
    let mean = rest.iter().sum::<f64>() / rest.len() as f64;
    let var =
        rest.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (rest.len() - 1) as f64;
    let sd = var.sqrt();
    let z = if sd == 0.0 {
        if x == mean {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (x - mean).abs() / sd
    };
    Ok(AnomalyScore { z })
}

/// Sick iff z strictly exceeds the threshold.
pub fn classify(z: f64, threshold: f64) -> Label {
    Label::from_sick(z > threshold)
}

/// A normalized anomaly probability for downstream stacking: the logistic
/// of (z - threshold), saturating for the infinity sentinel.
pub fn graded_probability(z: f64, threshold: f64) -> f64 {
    if z.is_infinite() {
        return 1.0;
    }
    sigmoid(z - threshold)
}

/// Result of the leave-one-out threshold fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdFit {
    /// F1-maximizing threshold over the full instance set.
    pub threshold: f64,
    /// Its F1 on the full set.
    pub f1: f64,
    /// Per-instance held-out predictions (threshold fit without that
    /// instance), for unbiased downstream use.
    pub heldout_predictions: Vec<Label>,
    /// The per-fold thresholds behind those predictions.
    pub fold_thresholds: Vec<f64>,
}

fn f1_at(threshold: f64, instances: &[(f64, Label)]) -> f64 {
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for &(z, label) in instances {
        let predicted = z > threshold;
        match (label.is_sick(), predicted) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => {}
        }
    }
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Sweep candidates: below the smallest finite z, midpoints between
/// consecutive distinct finite z values, and above the largest.
fn candidate_thresholds(instances: &[(f64, Label)]) -> Vec<f64> {
    let mut finite: Vec<f64> = instances
        .iter()
        .map(|(z, _)| *z)
        .filter(|z| z.is_finite())
        .collect();
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    finite.dedup();
    if finite.is_empty() {
        return vec![0.0];
    }
    let mut out = Vec::with_capacity(finite.len() + 1);
    out.push(finite[0] - 1.0);
    for pair in finite.windows(2) {
        out.push((pair[0] + pair[1]) / 2.0);
    }
    out.push(finite[finite.len() - 1] + 1.0);
    out
}

/// Best threshold by F1 over the sweep; ties go to the larger threshold
/// (fewer predicted positives).
fn best_threshold(instances: &[(f64, Label)]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for thr in candidate_thresholds(instances) {
        let f1 = f1_at(thr, instances);
        if f1 >= best.1 {
            best = (thr, f1);
        }
    }
    (best.0, best.1)
}

/// Fit the decision threshold: the returned threshold maximizes F1 on the
/// full set, and each instance also receives a held-out prediction from a
/// threshold fit on the remaining instances.
pub fn fit_threshold_loocv(instances: &[(f64, Label)]) -> Result<ThresholdFit> {
    if instances.len() < 2 {
        return Err(Error::InsufficientData(
            "threshold fit needs at least 2 instances".into(),
        ));
    }
    if instances.iter().any(|(z, _)| z.is_nan()) {
        return Err(Error::Validation("NaN z-score".into()));
    }
    let has_sick = instances.iter().any(|(_, l)| l.is_sick());
    let has_not = instances.iter().any(|(_, l)| !l.is_sick());
    if !has_sick || !has_not {
        return Err(Error::SingleClass);
    }
    let (threshold, f1) = best_threshold(instances);
    let mut heldout_predictions = Vec::with_capacity(instances.len());
    let mut fold_thresholds = Vec::with_capacity(instances.len());
    let mut rest = Vec::with_capacity(instances.len() - 1);
    for i in 0..instances.len() {
        rest.clear();
        rest.extend(
            instances
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, inst)| *inst),
        );
        let (fold_thr, _) = best_threshold(&rest);
        fold_thresholds.push(fold_thr);
        heldout_predictions.push(classify(instances[i].0, fold_thr));
    }
    Ok(ThresholdFit {
        threshold,
        f1,
        heldout_predictions,
        fold_thresholds,
    })
}
