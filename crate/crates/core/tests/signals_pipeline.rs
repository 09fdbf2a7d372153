//! End-to-end check of the signal harness and meta stage on a small
//! synthetic cohort.

use fluscope_core::corpus::{generate_synthetic_cohort, MonthRange, SyntheticConfig};
use fluscope_core::learners::{AlgorithmKind, AlgorithmSpec};
use fluscope_core::meta::{
    build_meta_dataset, compute_base_signals, evaluate_meta, SignalConfig, SignalFamily,
};

fn small_cohort_config() -> SyntheticConfig {
    SyntheticConfig {
        rng_seed: 41,
        n_seed_users: 40,
        monthly_tweet_mean: 25.0,
        followers_mean: 3.0,
        friends_mean: 3.0,
        periphery_tweet_mean: 8.0,
        window: MonthRange::new("2012-11".parse().unwrap(), "2013-02".parse().unwrap())
            .unwrap(),
        ..SyntheticConfig::default()
    }
}

fn small_signal_config() -> SignalConfig {
    SignalConfig {
        master_seed: 17,
        cv_folds: 5,
        expert_classifiers: vec![AlgorithmKind::NaiveBayes, AlgorithmKind::DecisionTree],
        mined_classifiers: vec![AlgorithmKind::NaiveBayes],
        network_classifiers: vec![AlgorithmKind::NaiveBayes],
        mined_k: vec![10],
        network_k: vec![10],
        ..SignalConfig::default()
    }
}

#[test]
fn signals_to_meta_roundtrip() {
    let cohort = generate_synthetic_cohort(&small_cohort_config()).unwrap();
    let out = compute_base_signals(&cohort, &small_signal_config()).unwrap();

    // one bundle per user-month, complete and probability-valued
    assert_eq!(out.bundles.len(), 40 * 4);
    assert_eq!(out.instance_ids.len(), out.bundles.len());
    let meta_data = build_meta_dataset(&out.bundles, &out.labels).unwrap();
    assert_eq!(meta_data.len(), out.bundles.len());

    // every family is represented and chosen
    for family in fluscope_core::meta::SIGNAL_FAMILIES {
        assert!(out.best.contains_key(&family), "{family:?} missing");
    }
    // selection agrees with the candidate table
    for (family, chosen) in &out.best {
        let best_auc = out
            .candidate_evals
            .iter()
            .filter(|e| e.family == *family)
            .map(|e| e.auc)
            .fold(f64::NEG_INFINITY, f64::max);
        let chosen_auc = out
            .candidate_evals
            .iter()
            .find(|e| e.family == *family && &e.candidate == chosen)
            .unwrap()
            .auc;
        assert_eq!(chosen_auc, best_auc);
    }

    // the text signal dominates on this cohort and the meta stays close
    let best_single = out
        .candidate_evals
        .iter()
        .map(|e| e.auc)
        .fold(f64::NEG_INFINITY, f64::max);
    let report = evaluate_meta(
        &AlgorithmSpec::new(AlgorithmKind::LogitBoost).with_seed(5),
        &meta_data,
        23,
    )
    .unwrap();
    assert!(
        report.auc >= best_single - 0.05,
        "meta {} far below best single {best_single}",
        report.auc
    );
    assert!(report.auc > 0.8, "meta AUC {} unexpectedly weak", report.auc);

    // determinism end to end
    let again = compute_base_signals(&cohort, &small_signal_config()).unwrap();
    for (a, b) in out.bundles.iter().zip(&again.bundles) {
        assert_eq!(a, b);
    }
}

#[test]
fn human_signal_tracks_annotations() {
    let cohort = generate_synthetic_cohort(&small_cohort_config()).unwrap();
    let out = compute_base_signals(&cohort, &small_signal_config()).unwrap();
    let human = out
        .candidate_evals
        .iter()
        .find(|e| e.family == SignalFamily::Human)
        .unwrap();
    // two-valued scores: epsilon and 1 - epsilon
    for s in &human.scores {
        assert!((*s - 0.01).abs() < 1e-12 || (*s - 0.99).abs() < 1e-12);
    }
    // the positives line up with annotated sick months
    let n_pos = human.scores.iter().filter(|s| **s > 0.5).count();
    assert_eq!(n_pos, cohort.annotations().len());
    // perfect precision: every flagged instance is a sick month
    for (s, l) in human.scores.iter().zip(&out.labels) {
        if *s > 0.5 {
            assert!(l.is_sick());
        }
    }
}
