//! Shared experiment machinery behind the signals/meta/report subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

use fluscope_core::anomaly;
use fluscope_core::corpus::{
    partition_user_months, Cohort, UserMonth, YearMonth,
};
use fluscope_core::eval::{
    auc_pairwise, roc_and_auc,
    ConfusionMatrix, EvalReport,
};
use fluscope_core::features::{
    KeywordSet, Label,
};
use fluscope_core::learners::AlgorithmSpec;
use fluscope_core::meta::{
    build_meta_dataset, compute_base_signals, evaluate_meta, network_auc_samples,
    NetworkAnovaDesign, SignalFamily, SignalsOutput,
};
use fluscope_core::seed::derive_u64;
use fluscope_core::stats::{anova, fisher_exact, ks_two_sample, odds_ratio, AnovaTable,
    ContingencyTable2x2, Factor};
use fluscope_core::textprep::{preprocess, StemmedDoc};

use crate::config::ExperimentConfig;
use crate::output::{fmt6, roc_svg, write_csv, write_text, write_tsv};

/// Stemmed view of the partitioned cohort, shared by the report tables.
pub struct StemmedCohort {
    pub months: Vec<UserMonth>,
    pub labels: Vec<Label>,
    pub own_docs: Vec<Vec<StemmedDoc>>,
}

pub fn stem_cohort(cohort: &Cohort, config: &ExperimentConfig) -> Result<StemmedCohort> {
    let signal_config = config.signal_config()?;
    let months = partition_user_months(cohort, config.zero_tweet_policy()?);
    let labels: Vec<Label> = months.iter().map(|m| m.label).collect();
    let tweet_docs: Vec<StemmedDoc> = cohort
        .tweets()
        .par_iter()
        .map(|t| preprocess(&t.text, &signal_config.stoplist))
        .collect();
    let own_docs: Vec<Vec<StemmedDoc>> = months
        .iter()
        .map(|m| m.tweet_refs.iter().map(|&i| tweet_docs[i].clone()).collect())
        .collect();
    Ok(StemmedCohort {
        months,
        labels,
        own_docs,
    })
}

/// Expert-keyword occurrence tests: per stem, total occurrences, the
/// month-level presence odds ratio and its exact p-value.
pub fn expert_keyword_rows(stemmed: &StemmedCohort) -> Result<Vec<Vec<String>>> {
    let ks = KeywordSet::expert();
    let mut rows = Vec::new();
    for stem in &ks.keywords {
        let mut total = 0u64;
        let (mut a, mut b, mut c, mut d) = (0u64, 0u64, 0u64, 0u64);
        for (docs, label) in stemmed.own_docs.iter().zip(&stemmed.labels) {
            let count: u64 = docs
                .iter()
                .flat_map(|doc| doc.stems.iter())
                .filter(|s| *s == stem)
                .count() as u64;
            total += count;
            match (label.is_sick(), count > 0) {
                (true, true) => a += 1,
                (true, false) => b += 1,
                (false, true) => c += 1,
                (false, false) => d += 1,
            }
        }
        let table = ContingencyTable2x2::new(a, b, c, d);
        let test = fisher_exact(&table)?;
        rows.push(vec![
            stem.clone(),
            total.to_string(),
            fmt6(odds_ratio(&table)),
            fmt6(test.p_value),
        ]);
    }
    Ok(rows)
}

/// Month-level confusion of the annotation channel: predicted sick iff the
/// month has at least one annotated sick tweet.
pub fn human_confusion(cohort: &Cohort, stemmed: &StemmedCohort) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (um, label) in stemmed.months.iter().zip(&stemmed.labels) {
        let predicted = cohort.annotation_count(&um.user_id, um.month) >= 1;
        match (label.is_sick(), predicted) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_neg += 1,
            (false, true) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
        }
    }
    cm
}

pub struct AnomalyArtifacts {
    /// (user, month, z, held-out prediction) for instances with a score.
    pub rows: Vec<(String, YearMonth, f64, Label)>,
    pub threshold: f64,
    pub full_f1: f64,
    pub heldout_confusion: ConfusionMatrix,
    pub heldout_f1: f64,
    pub auc: f64,
    pub ks_d: f64,
    pub ks_p: f64,
}

/// The frequency-signal report: z per scorable user-month, the fitted
/// threshold, held-out confusion, AUC of |z|, and the KS separation between
/// sick and not-sick z distributions.
pub fn anomaly_artifacts(cohort: &Cohort, stemmed: &StemmedCohort) -> Result<AnomalyArtifacts> {
    let mut series_cache: BTreeMap<&str, anomaly::MonthlySeries> = BTreeMap::new();
    for um in &stemmed.months {
        series_cache
            .entry(um.user_id.as_str())
            .or_insert_with(|| anomaly::MonthlySeries::for_user(cohort, &um.user_id).unwrap());
    }
    let mut scored: Vec<(usize, f64)> = Vec::new();
    for (i, um) in stemmed.months.iter().enumerate() {
        if let Ok(score) = anomaly::zscore(&series_cache[um.user_id.as_str()], um.month) {
            scored.push((i, score.z));
        }
    }
    let fit_set: Vec<(f64, Label)> = scored
        .iter()
        .map(|&(i, z)| (z, stemmed.labels[i]))
        .collect();
    let fit = anomaly::fit_threshold_loocv(&fit_set)?;
    let heldout_labels: Vec<Label> = scored.iter().map(|&(i, _)| stemmed.labels[i]).collect();
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (pred, truth) in fit.heldout_predictions.iter().zip(&heldout_labels) {
        match (truth.is_sick(), pred.is_sick()) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_neg += 1,
            (false, true) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
        }
    }
    let finite_scores: Vec<f64> = fit_set
        .iter()
        .map(|(z, _)| if z.is_finite() { *z } else { f64::MAX })
        .collect();
    let auc = auc_pairwise(&finite_scores, &heldout_labels)?;
    let sick_z: Vec<f64> = fit_set
        .iter()
        .filter(|(z, l)| l.is_sick() && z.is_finite())
        .map(|(z, _)| *z)
        .collect();
    let not_z: Vec<f64> = fit_set
        .iter()
        .filter(|(z, l)| !l.is_sick() && z.is_finite())
        .map(|(z, _)| *z)
        .collect();
    let ks = ks_two_sample(&sick_z, &not_z)?;
    let rows = scored
        .iter()
        .zip(&fit.heldout_predictions)
        .map(|(&(i, z), pred)| {
            let um = &stemmed.months[i];
            (um.user_id.clone(), um.month, z, *pred)
        })
        .collect();
    Ok(AnomalyArtifacts {
        rows,
        threshold: fit.threshold,
        full_f1: fit.f1,
        heldout_confusion: cm,
        heldout_f1: cm.f1(),
        auc,
        ks_d: ks.statistic,
        ks_p: ks.p_value,
    })
}

/// AUC distributions over the network design (source x keyword size x
/// classifier) with repeated stratified cross-validation, plus the
/// sequential ANOVA over those factors.
pub fn network_anova(
    cohort: &Cohort,
    config: &ExperimentConfig,
) -> Result<(Vec<(String, usize, String, f64)>, AnovaTable)> {
    let design = NetworkAnovaDesign {
        repeats: config.anova.repeats,
        folds: config.anova.folds,
        keyword_sizes: config.anova.keyword_sizes.clone(),
        classifiers: config.anova_kinds()?,
    };
    let raw = network_auc_samples(cohort, &config.signal_config()?, &design)?;
    let samples: Vec<(String, usize, String, f64)> = raw
        .iter()
        .map(|s| {
            (
                s.source.name().to_string(),
                s.keyword_size,
                s.classifier.name().to_string(),
                s.auc,
            )
        })
        .collect();
    let y: Vec<f64> = samples.iter().map(|s| s.3).collect();
    let factors = vec![
        Factor::new("source", samples.iter().map(|s| s.0.clone()).collect()),
        Factor::new(
            "keyword_size",
            samples.iter().map(|s| s.1.to_string()).collect(),
        ),
        Factor::new("classifier", samples.iter().map(|s| s.2.clone()).collect()),
    ];
    let table = anova(&y, &factors)?;
    Ok((samples, table))
}

pub struct MetaArtifacts {
    /// (classifier, report) for each second-level learner.
    pub reports: Vec<(String, EvalReport)>,
    /// The datamined-keyword baseline: (candidate, auc, accuracy).
    pub baseline: (String, f64, f64),
}

pub fn run_meta(signals: &SignalsOutput, config: &ExperimentConfig) -> Result<MetaArtifacts> {
    let meta_data = build_meta_dataset(&signals.bundles, &signals.labels)?;
    let mut reports = Vec::new();
    for (i, kind) in config.meta_kinds()?.into_iter().enumerate() {
        let spec = AlgorithmSpec::new(kind)
            .with_seed(derive_u64(config.master_seed, "meta", "algo", i as u64));
        let report = evaluate_meta(
            &spec,
            &meta_data,
            derive_u64(config.master_seed, "meta", "folds", 0),
        )?;
        reports.push((kind.name().to_string(), report));
    }
    let baseline_eval = signals
        .candidate_evals
        .iter()
        .filter(|e| e.family == SignalFamily::MinedKeywords)
        .max_by(|a, b| a.auc.partial_cmp(&b.auc).unwrap())
        .context("mined family missing")?;
    Ok(MetaArtifacts {
        reports,
        baseline: (
            baseline_eval.candidate.clone(),
            baseline_eval.auc,
            baseline_eval.accuracy,
        ),
    })
}

pub fn write_signal_artifacts(out_dir: &Path, signals: &SignalsOutput) -> Result<()> {
    let rows: Vec<Vec<String>> = signals
        .candidate_evals
        .iter()
        .map(|e| {
            vec![
                e.family.name().to_string(),
                e.candidate.clone(),
                fmt6(e.auc),
                fmt6(e.accuracy),
                signals.best[&e.family].clone(),
            ]
        })
        .collect();
    write_tsv(
        &out_dir.join("signal_candidates.tsv"),
        &["family", "candidate", "auc", "accuracy", "family_best"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = signals
        .bundles
        .iter()
        .zip(&signals.labels)
        .map(|(b, l)| {
            vec![
                b.instance_id.clone(),
                if l.is_sick() { "sick" } else { "not_sick" }.to_string(),
                fmt6(b.p_expert.unwrap_or(f64::NAN)),
                fmt6(b.p_mined.unwrap_or(f64::NAN)),
                fmt6(b.p_human.unwrap_or(f64::NAN)),
                fmt6(b.p_anomaly.unwrap_or(f64::NAN)),
                fmt6(b.p_network.unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    write_csv(
        &out_dir.join("signals.csv"),
        &[
            "instance",
            "label",
            "p_expert",
            "p_mined",
            "p_human",
            "p_anomaly",
            "p_network",
        ],
        &rows,
    )
}

pub fn write_roc(out_dir: &Path, name: &str, scores: &[f64], labels: &[Label]) -> Result<f64> {
    let (curve, auc) = roc_and_auc(scores, labels)?;
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|(fpr, tpr)| vec![fmt6(*fpr), fmt6(*tpr)])
        .collect();
    write_csv(
        &out_dir.join(format!("roc_{name}.csv")),
        &["false_positive_rate", "true_positive_rate"],
        &rows,
    )?;
    write_text(
        &out_dir.join(format!("roc_{name}.svg")),
        &roc_svg(&curve, &format!("{name} (AUC {})", fmt6(auc))),
    )?;
    Ok(auc)
}

/// The full report: every table plus ROC artifacts, deterministically.
pub fn run_report(cohort: &Cohort, config: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    write_text(&out_dir.join("resolved_config.toml"), &config.resolved_toml()?)?;

    let stemmed = stem_cohort(cohort, config)?;

    // diagnosed-month histogram
    let mut hist: BTreeMap<YearMonth, u64> = BTreeMap::new();
    for m in cohort.window().months() {
        hist.insert(m, 0);
    }
    for u in cohort.users() {
        if let Some(m) = u.diagnosed_month {
            *hist.entry(m).or_insert(0) += 1;
        }
    }
    write_tsv(
        &out_dir.join("sick_month_histogram.tsv"),
        &["month", "diagnosed"],
        &hist
            .iter()
            .map(|(m, c)| vec![m.to_string(), c.to_string()])
            .collect::<Vec<_>>(),
    )?;

    // expert keyword tests
    write_tsv(
        &out_dir.join("expert_keyword_tests.tsv"),
        &["keyword", "total", "odds_ratio", "p_value"],
        &expert_keyword_rows(&stemmed)?,
    )?;

    // human channel confusion
    let cm = human_confusion(cohort, &stemmed);
    write_tsv(
        &out_dir.join("human_confusion.tsv"),
        &["", "pred_sick", "pred_not_sick"],
        &[
            vec![
                "sick".into(),
                cm.true_pos.to_string(),
                cm.false_neg.to_string(),
            ],
            vec![
                "not_sick".into(),
                cm.false_pos.to_string(),
                cm.true_neg.to_string(),
            ],
            vec![
                "precision/recall".into(),
                fmt6(cm.precision()),
                fmt6(cm.recall()),
            ],
        ],
    )?;

    // anomaly signal
    let art = anomaly_artifacts(cohort, &stemmed)?;
    write_csv(
        &out_dir.join("anomaly_scores.csv"),
        &["user", "month", "z", "prediction"],
        &art
            .rows
            .iter()
            .map(|(u, m, z, p)| {
                vec![
                    u.clone(),
                    m.to_string(),
                    fmt6(*z),
                    if p.is_sick() { "sick" } else { "not_sick" }.to_string(),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    write_tsv(
        &out_dir.join("anomaly_summary.tsv"),
        &["metric", "value"],
        &[
            vec!["threshold".into(), fmt6(art.threshold)],
            vec!["full_f1".into(), fmt6(art.full_f1)],
            vec!["heldout_f1".into(), fmt6(art.heldout_f1)],
            vec!["auc".into(), fmt6(art.auc)],
            vec!["ks_d".into(), fmt6(art.ks_d)],
            vec!["ks_p".into(), fmt6(art.ks_p)],
            vec!["tp".into(), art.heldout_confusion.true_pos.to_string()],
            vec!["fn".into(), art.heldout_confusion.false_neg.to_string()],
            vec!["fp".into(), art.heldout_confusion.false_pos.to_string()],
            vec!["tn".into(), art.heldout_confusion.true_neg.to_string()],
        ],
    )?;

    // top predictive keywords
    let ratios = fluscope_core::features::top_predictive_keywords(
        &stemmed.own_docs,
        &stemmed.labels,
        30,
    )?;
    write_csv(
        &out_dir.join("top_keywords.csv"),
        &["stem", "ratio"],
        &ratios
            .iter()
            .map(|r| vec![r.keyword.clone(), format!("{:.3}", r.ratio)])
            .collect::<Vec<_>>(),
    )?;

    // signals, per-family ROC curves, meta table
    let signal_config = config.signal_config()?;
    let signals = compute_base_signals(cohort, &signal_config)?;
    write_signal_artifacts(out_dir, &signals)?;
    for family in fluscope_core::meta::SIGNAL_FAMILIES {
        let best = signals
            .candidate_evals
            .iter()
            .find(|e| e.family == family && e.candidate == signals.best[&family])
            .expect("best candidate present");
        write_roc(out_dir, family.name(), &best.scores, &signals.labels)?;
    }

    let meta = run_meta(&signals, config)?;
    let mut rows: Vec<Vec<String>> = meta
        .reports
        .iter()
        .map(|(name, r)| vec![name.clone(), fmt6(r.auc), fmt6(r.accuracy)])
        .collect();
    rows.push(vec![
        format!("baseline:{}", meta.baseline.0),
        fmt6(meta.baseline.1),
        fmt6(meta.baseline.2),
    ]);
    write_tsv(
        &out_dir.join("meta_performance.tsv"),
        &["classifier", "auc", "accuracy"],
        &rows,
    )?;
    let best_meta = meta
        .reports
        .iter()
        .max_by(|a, b| a.1.auc.partial_cmp(&b.1.auc).unwrap())
        .context("no meta reports")?;
    let meta_scores: Vec<f64> = best_meta.1.scores.iter().map(|(_, _, p)| *p).collect();
    write_roc(out_dir, "meta", &meta_scores, &signals.labels)?;

    // variance analysis over the network design
    let (samples, table) = network_anova(cohort, config)?;
    write_csv(
        &out_dir.join("network_auc_samples.csv"),
        &["source", "keyword_size", "classifier", "auc"],
        &samples
            .iter()
            .map(|(s, k, c, a)| vec![s.clone(), k.to_string(), c.clone(), fmt6(*a)])
            .collect::<Vec<_>>(),
    )?;
    let mut rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.factor.clone(),
                r.df.to_string(),
                fmt6(r.sum_sq),
                fmt6(r.f_value),
                format!("{:.6e}", r.p_value),
            ]
        })
        .collect();
    rows.push(vec![
        "residuals".into(),
        table.residual_df.to_string(),
        fmt6(table.residual_sum_sq),
        String::new(),
        String::new(),
    ]);
    write_tsv(
        &out_dir.join("network_anova.tsv"),
        &["factor", "df", "sum_sq", "f_value", "p_value"],
        &rows,
    )?;

    Ok(())
}
