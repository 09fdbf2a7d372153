//! The base-signal harness: from a cohort to the five per-instance held-out
//! probabilities and the per-candidate evaluation table behind them.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::anomaly::{self, MonthlySeries};
use crate::corpus::{
    assemble_network_stream, partition_user_months, Cohort, Direction, ZeroTweetSickPolicy,
};
use crate::error::{Error, Result};
use crate::eval::{auc_pairwise, f1_accuracy_confusion, k_fold_cv, stratified_fold_assignment};
use crate::features::{
    build_vocabulary, mine_keywords, normalized_rate_vector, presence_vector, Dataset,
    FeatureVector, KeywordSet, Label, Provenance,
};
use crate::learners::{predict, train, AlgorithmKind, AlgorithmSpec, ParamValue, Params};
use crate::meta::{BaseSignalBundle, FamilyEval, SignalFamily};
use crate::seed::derive_u64;
use crate::textprep::{preprocess, StemmedDoc, Stoplist};

/// Whether mined keywords are selected inside each training fold (no test
/// leakage) or once on the full data (for comparison).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgScope {
    PerFold,
    Full,
}

#[derive(Debug, Clone)]
pub struct SignalConfig {
    pub master_seed: u64,
    pub cv_folds: usize,
    pub expert_classifiers: Vec<AlgorithmKind>,
    pub mined_classifiers: Vec<AlgorithmKind>,
    pub network_classifiers: Vec<AlgorithmKind>,
    pub mined_k: Vec<usize>,
    pub network_k: Vec<usize>,
    /// Vocabulary size cap before information-gain ranking.
    pub vocabulary_cap: usize,
    pub ig_scope: IgScope,
    /// Probability assigned by the human channel: 1-ε with an annotated
    /// sick tweet, ε without.
    pub human_epsilon: f64,
    /// Graded anomaly probability (logistic of z - threshold) instead of a
    /// hard 0/1 label.
    pub anomaly_graded: bool,
    pub zero_tweet_policy: ZeroTweetSickPolicy,
    pub stoplist: Stoplist,
}

impl Default for SignalConfig {
    fn default() -> Self {
        SignalConfig {
            master_seed: 0,
            cv_folds: 10,
            expert_classifiers: vec![
                AlgorithmKind::NaiveBayes,
                AlgorithmKind::LogisticRegression,
                AlgorithmKind::DecisionTree,
                AlgorithmKind::RandomForest,
                AlgorithmKind::LinearSvm,
            ],
            mined_classifiers: vec![
                AlgorithmKind::NaiveBayes,
                AlgorithmKind::LogisticRegression,
                AlgorithmKind::DecisionTree,
                AlgorithmKind::RandomForest,
            ],
            network_classifiers: vec![
                AlgorithmKind::NaiveBayes,
                AlgorithmKind::LogisticRegression,
            ],
            mined_k: vec![10, 100],
            network_k: vec![10, 100],
            vocabulary_cap: 12_393,
            ig_scope: IgScope::PerFold,
            human_epsilon: 0.01,
            anomaly_graded: true,
            zero_tweet_policy: ZeroTweetSickPolicy::KeepSick,
            stoplist: Stoplist::vendored(),
        }
    }
}

impl SignalConfig {
    fn validate(&self) -> Result<()> {
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if !(0.0..=0.5).contains(&self.human_epsilon) {
            return Err(Error::Config("human_epsilon must lie in [0, 0.5]".into()));
        }
        if self.vocabulary_cap == 0 {
            return Err(Error::Config("vocabulary_cap must be positive".into()));
        }
        for (name, list) in [
            ("expert_classifiers", &self.expert_classifiers),
            ("mined_classifiers", &self.mined_classifiers),
            ("network_classifiers", &self.network_classifiers),
        ] {
            if list.is_empty() {
                return Err(Error::Config(format!("{name} must not be empty")));
            }
        }
        if self.mined_k.is_empty() || self.network_k.is_empty() {
            return Err(Error::Config("keyword size lists must not be empty".into()));
        }
        Ok(())
    }
}

/// One candidate's held-out scores and summary metrics.
#[derive(Debug, Clone)]
pub struct CandidateEval {
    pub family: SignalFamily,
    pub candidate: String,
    pub auc: f64,
    pub accuracy: f64,
    pub scores: Vec<f64>,
}

impl CandidateEval {
    fn new(
        family: SignalFamily,
        candidate: String,
        scores: Vec<f64>,
        labels: &[Label],
    ) -> Result<Self> {
        let auc = auc_pairwise(&scores, labels)?;
        let (_, accuracy, _) = f1_accuracy_confusion(&scores, labels, 0.5);
        Ok(CandidateEval {
            family,
            candidate,
            auc,
            accuracy,
            scores,
        })
    }

    pub fn as_family_eval(&self) -> FamilyEval {
        FamilyEval {
            family: self.family,
            candidate: self.candidate.clone(),
            auc: self.auc,
            accuracy: self.accuracy,
        }
    }
}

/// Everything the signal stage hands to the meta stage.
#[derive(Debug, Clone)]
pub struct SignalsOutput {
    pub instance_ids: Vec<String>,
    pub labels: Vec<Label>,
    pub bundles: Vec<BaseSignalBundle>,
    pub candidate_evals: Vec<CandidateEval>,
    /// Chosen candidate name per family.
    pub best: BTreeMap<SignalFamily, String>,
}

fn algorithm_spec(kind: AlgorithmKind, seed: u64, standardize: bool) -> AlgorithmSpec {
    let mut params = Params::default();
    if standardize
        && matches!(
            kind,
            AlgorithmKind::LogisticRegression | AlgorithmKind::LinearSvm
        )
    {
        params = params.set("standardize", ParamValue::Bool(true));
    }
    AlgorithmSpec {
        kind,
        params,
        rng_seed: seed,
    }
}

/// Candidate evaluation with per-fold keyword mining: keywords are chosen
/// on each training fold, features rebuilt, and the held-out scores stitched
/// together; requested sizes are capped at the fold vocabulary.
#[allow(clippy::too_many_arguments)]
fn eval_mined_candidates<F>(
    family: SignalFamily,
    name_prefix: &str,
    mining_docs: &[Vec<StemmedDoc>],
    labels: &[Label],
    kinds: &[AlgorithmKind],
    sizes: &[usize],
    cfg: &SignalConfig,
    fold_stream: &str,
    featurize: F,
) -> Result<Vec<CandidateEval>>
where
    F: Fn(usize, &KeywordSet) -> FeatureVector + Sync,
{
    let n = labels.len();
    let max_k = *sizes.iter().max().expect("validated non-empty");
    let mut score_table: Vec<Vec<f64>> = vec![vec![f64::NAN; n]; sizes.len() * kinds.len()];

    match cfg.ig_scope {
        IgScope::PerFold => {
            let folds = stratified_fold_assignment(
                labels,
                cfg.cv_folds,
                derive_u64(cfg.master_seed, "signals", fold_stream, 0),
            )?;
            for fold in 0..cfg.cv_folds {
                let train_idx: Vec<usize> = (0..n).filter(|i| folds[*i] != fold).collect();
                let test_idx: Vec<usize> = (0..n).filter(|i| folds[*i] == fold).collect();
                if train_idx.is_empty() || test_idx.is_empty() {
                    continue;
                }
                let train_docs: Vec<&Vec<StemmedDoc>> =
                    train_idx.iter().map(|&i| &mining_docs[i]).collect();
                let train_labels: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();
                let vocab = build_vocabulary(
                    train_docs.iter().flat_map(|d| d.iter()),
                    cfg.vocabulary_cap,
                );
                if vocab.is_empty() {
                    continue;
                }
                let owned_train: Vec<&[StemmedDoc]> =
                    train_docs.iter().map(|d| d.as_slice()).collect();
                let ranked = mine_keywords(
                    &owned_train,
                    &train_labels,
                    &vocab,
                    max_k.min(vocab.len()),
                )?;
                for (ki, &k) in sizes.iter().enumerate() {
                    let k_eff = k.min(ranked.keywords.len());
                    let ks = KeywordSet::new(
                        ranked.keywords[..k_eff].to_vec(),
                        Provenance::MinedTopK(k_eff),
                    )?;
                    let schema = featurize(train_idx[0], &ks).schema_id;
                    let mut train_data = Dataset::new(&schema);
                    for &i in &train_idx {
                        train_data.push(featurize(i, &ks), labels[i], format!("i{i}"))?;
                    }
                    for (ci, &kind) in kinds.iter().enumerate() {
                        let spec = algorithm_spec(
                            kind,
                            derive_u64(
                                cfg.master_seed,
                                "signals",
                                &format!("{fold_stream}_algo_{kind:?}_{k}"),
                                fold as u64,
                            ),
                            family == SignalFamily::Network,
                        );
                        let model = train(&spec, &train_data)?;
                        for &i in &test_idx {
                            score_table[ki * kinds.len() + ci][i] =
                                predict(&model, &featurize(i, &ks))?.p_sick;
                        }
                    }
                }
            }
        }
        IgScope::Full => {
            let vocab = build_vocabulary(
                mining_docs.iter().flat_map(|d| d.iter()),
                cfg.vocabulary_cap,
            );
            if vocab.is_empty() {
                return Err(Error::InsufficientData("empty vocabulary".into()));
            }
            let all: Vec<&[StemmedDoc]> = mining_docs.iter().map(|d| d.as_slice()).collect();
            let ranked = mine_keywords(&all, labels, &vocab, max_k.min(vocab.len()))?;
            for (ki, &k) in sizes.iter().enumerate() {
                let k_eff = k.min(ranked.keywords.len());
                let ks = KeywordSet::new(
                    ranked.keywords[..k_eff].to_vec(),
                    Provenance::MinedTopK(k_eff),
                )?;
                let schema = featurize(0, &ks).schema_id;
                let mut data = Dataset::new(&schema);
                for i in 0..n {
                    data.push(featurize(i, &ks), labels[i], format!("i{i}"))?;
                }
                for (ci, &kind) in kinds.iter().enumerate() {
                    let spec = algorithm_spec(
                        kind,
                        derive_u64(
                            cfg.master_seed,
                            "signals",
                            &format!("{fold_stream}_algo_{kind:?}_{k}"),
                            0,
                        ),
                        family == SignalFamily::Network,
                    );
                    score_table[ki * kinds.len() + ci] = k_fold_cv(
                        &data,
                        cfg.cv_folds,
                        &spec,
                        derive_u64(cfg.master_seed, "signals", fold_stream, 0),
                    )?;
                }
            }
        }
    }

    let mut out = Vec::with_capacity(sizes.len() * kinds.len());
    for (ki, &k) in sizes.iter().enumerate() {
        for (ci, &kind) in kinds.iter().enumerate() {
            let scores = std::mem::take(&mut score_table[ki * kinds.len() + ci]);
            if scores.iter().any(|s| s.is_nan()) {
                return Err(Error::InsufficientData(format!(
                    "fold coverage incomplete for {name_prefix} k={k}"
                )));
            }
            out.push(CandidateEval::new(
                family,
                format!("{}@{name_prefix}k{k}", kind.name()),
                scores,
                labels,
            )?);
        }
    }
    Ok(out)
}

/// Compute all five base signals for every user-month.
pub fn compute_base_signals(cohort: &Cohort, cfg: &SignalConfig) -> Result<SignalsOutput> {
    cfg.validate()?;
    let user_months = partition_user_months(cohort, cfg.zero_tweet_policy);
    if user_months.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least 2 user-months".into(),
        ));
    }
    let labels: Vec<Label> = user_months.iter().map(|um| um.label).collect();
    let instance_ids: Vec<String> = user_months.iter().map(|um| um.instance_id()).collect();
    if !labels.iter().any(|l| l.is_sick()) || !labels.iter().any(|l| !l.is_sick()) {
        return Err(Error::SingleClass);
    }

    // stem every tweet once
    let tweet_docs: Vec<StemmedDoc> = cohort
        .tweets()
        .par_iter()
        .map(|t| preprocess(&t.text, &cfg.stoplist))
        .collect();
    let own_docs: Vec<Vec<StemmedDoc>> = user_months
        .iter()
        .map(|um| {
            um.tweet_refs
                .iter()
                .map(|&i| tweet_docs[i].clone())
                .collect()
        })
        .collect();

    let mut evals: Vec<CandidateEval> = Vec::new();

    // expert keywords: fixed presence features, plain cross-validation
    let expert_set = KeywordSet::expert();
    {
        let schema = presence_vector(&own_docs[0], &expert_set).schema_id;
        let mut data = Dataset::new(&schema);
        for (i, docs) in own_docs.iter().enumerate() {
            data.push(
                presence_vector(docs, &expert_set),
                labels[i],
                instance_ids[i].clone(),
            )?;
        }
        for &kind in &cfg.expert_classifiers {
            let spec = algorithm_spec(
                kind,
                derive_u64(cfg.master_seed, "signals", &format!("expert_algo_{kind:?}"), 0),
                false,
            );
            let scores = k_fold_cv(
                &data,
                cfg.cv_folds,
                &spec,
                derive_u64(cfg.master_seed, "signals", "expert_folds", 0),
            )?;
            evals.push(CandidateEval::new(
                SignalFamily::ExpertKeywords,
                kind.name().to_string(),
                scores,
                &labels,
            )?);
        }
    }

    // mined keywords: per-fold information-gain selection on the user's own
    // tweets, presence features
    evals.extend(eval_mined_candidates(
        SignalFamily::MinedKeywords,
        "",
        &own_docs,
        &labels,
        &cfg.mined_classifiers,
        &cfg.mined_k,
        cfg,
        "mined_folds",
        |i, ks| presence_vector(&own_docs[i], ks),
    )?);

    // human annotation channel
    {
        let scores: Vec<f64> = user_months
            .iter()
            .map(|um| {
                if cohort.annotation_count(&um.user_id, um.month) >= 1 {
                    1.0 - cfg.human_epsilon
                } else {
                    cfg.human_epsilon
                }
            })
            .collect();
        evals.push(CandidateEval::new(
            SignalFamily::Human,
            "annotation_channel".to_string(),
            scores,
            &labels,
        )?);
    }

    // anomaly signal: z-scores with a leave-one-out threshold
    {
        let mut series_cache: HashMap<&str, MonthlySeries> = HashMap::new();
        for um in &user_months {
            if !series_cache.contains_key(um.user_id.as_str()) {
                series_cache.insert(
                    um.user_id.as_str(),
                    MonthlySeries::for_user(cohort, &um.user_id)?,
                );
            }
        }
        let zs: Vec<Option<f64>> = user_months
            .iter()
            .map(|um| {
                let series = &series_cache[um.user_id.as_str()];
                anomaly::zscore(series, um.month).ok().map(|s| s.z)
            })
            .collect();
        let fit_set: Vec<(f64, Label)> = zs
            .iter()
            .zip(&labels)
            .filter_map(|(z, l)| z.map(|z| (z, *l)))
            .collect();
        let fit = match anomaly::fit_threshold_loocv(&fit_set) {
            Ok(fit) => Some(fit),
            Err(Error::SingleClass) | Err(Error::InsufficientData(_)) => None,
            Err(e) => return Err(e),
        };
        let mut scores = vec![0.5; labels.len()];
        if let Some(fit) = &fit {
            let mut fit_pos = 0usize;
            for (i, z) in zs.iter().enumerate() {
                if let Some(z) = z {
                    scores[i] = if cfg.anomaly_graded {
                        anomaly::graded_probability(*z, fit.fold_thresholds[fit_pos])
                    } else if fit.heldout_predictions[fit_pos].is_sick() {
                        1.0
                    } else {
                        0.0
                    };
                    fit_pos += 1;
                }
            }
        }
        evals.push(CandidateEval::new(
            SignalFamily::Anomaly,
            "zscore_loocv".to_string(),
            scores,
            &labels,
        )?);
    }

    // network signal: character-normalized keyword rates over each side of
    // the user's graph, keywords mined per fold from the streams
    for direction in [Direction::Followers, Direction::Friends] {
        let mut stream_docs: Vec<Vec<StemmedDoc>> = Vec::with_capacity(user_months.len());
        let mut stream_chars: Vec<u64> = Vec::with_capacity(user_months.len());
        for um in &user_months {
            let stream = assemble_network_stream(cohort, &um.user_id, um.month, direction)?;
            stream_docs.push(
                stream
                    .tweet_indices
                    .iter()
                    .map(|&i| tweet_docs[i].clone())
                    .collect(),
            );
            stream_chars.push(stream.total_chars);
        }
        evals.extend(eval_mined_candidates(
            SignalFamily::Network,
            &format!("{}_", direction.name()),
            &stream_docs,
            &labels,
            &cfg.network_classifiers,
            &cfg.network_k,
            cfg,
            &format!("network_{}_folds", direction.name()),
            |i, ks| {
                let mut fv = normalized_rate_vector(&stream_docs[i], stream_chars[i], ks);
                fv.schema_id = format!("{}:{}", direction.name(), fv.schema_id);
                fv
            },
        )?);
    }

    // best candidate per family feeds the bundles
    let family_evals: Vec<FamilyEval> = evals.iter().map(|e| e.as_family_eval()).collect();
    let best_map = crate::meta::select_best_per_family(&family_evals)?;
    let mut best = BTreeMap::new();
    let mut bundles: Vec<BaseSignalBundle> = instance_ids
        .iter()
        .map(|id| BaseSignalBundle::new(id.clone()))
        .collect();
    for family in crate::meta::SIGNAL_FAMILIES {
        let chosen = &best_map[&family];
        let source = evals
            .iter()
            .find(|e| e.family == family && e.candidate == chosen.candidate)
            .expect("selected candidate exists");
        for (bundle, &score) in bundles.iter_mut().zip(&source.scores) {
            let slot = match family {
                SignalFamily::ExpertKeywords => &mut bundle.p_expert,
                SignalFamily::MinedKeywords => &mut bundle.p_mined,
                SignalFamily::Human => &mut bundle.p_human,
                SignalFamily::Anomaly => &mut bundle.p_anomaly,
                SignalFamily::Network => &mut bundle.p_network,
            };
            *slot = Some(score);
        }
        best.insert(family, chosen.candidate.clone());
    }

    Ok(SignalsOutput {
        instance_ids,
        labels,
        bundles,
        candidate_evals: evals,
        best,
    })
}

/// The repeated-cross-validation design for the network variance analysis.
#[derive(Debug, Clone)]
pub struct NetworkAnovaDesign {
    pub repeats: usize,
    pub folds: usize,
    pub keyword_sizes: Vec<usize>,
    pub classifiers: Vec<AlgorithmKind>,
}

/// One AUC sample from that design.
#[derive(Debug, Clone)]
pub struct NetworkAucSample {
    pub source: Direction,
    pub keyword_size: usize,
    pub classifier: AlgorithmKind,
    pub auc: f64,
}

/// AUC distributions over source x keyword size x classifier. Features are
/// mined once per (source, size) on the full data to fit the fixed-feature
/// repeated-CV contract; the signal path is the one that mines per fold.
pub fn network_auc_samples(
    cohort: &Cohort,
    cfg: &SignalConfig,
    design: &NetworkAnovaDesign,
) -> Result<Vec<NetworkAucSample>> {
    let user_months = partition_user_months(cohort, cfg.zero_tweet_policy);
    let labels: Vec<Label> = user_months.iter().map(|um| um.label).collect();
    let tweet_docs: Vec<StemmedDoc> = cohort
        .tweets()
        .par_iter()
        .map(|t| preprocess(&t.text, &cfg.stoplist))
        .collect();
    let mut samples = Vec::new();
    for direction in [Direction::Followers, Direction::Friends] {
        let mut stream_docs: Vec<Vec<StemmedDoc>> = Vec::with_capacity(user_months.len());
        let mut stream_chars: Vec<u64> = Vec::with_capacity(user_months.len());
        for um in &user_months {
            let stream = assemble_network_stream(cohort, &um.user_id, um.month, direction)?;
            stream_docs.push(
                stream
                    .tweet_indices
                    .iter()
                    .map(|&i| tweet_docs[i].clone())
                    .collect(),
            );
            stream_chars.push(stream.total_chars);
        }
        let vocab = build_vocabulary(
            stream_docs.iter().flat_map(|d| d.iter()),
            cfg.vocabulary_cap,
        );
        for &k in &design.keyword_sizes {
            let ks = mine_keywords(&stream_docs, &labels, &vocab, k.min(vocab.len()))?;
            let schema = format!("{}:{}", direction.name(), ks.schema_id());
            let mut data = Dataset::new(&schema);
            for (i, docs) in stream_docs.iter().enumerate() {
                let mut fv = normalized_rate_vector(docs, stream_chars[i], &ks);
                fv.schema_id = schema.clone();
                data.push(fv, labels[i], user_months[i].instance_id())?;
            }
            for &kind in &design.classifiers {
                let spec = algorithm_spec(
                    kind,
                    derive_u64(
                        cfg.master_seed,
                        "anova",
                        &format!("algo_{}_{}_{}", direction.name(), k, kind.name()),
                        0,
                    ),
                    true,
                );
                let aucs = crate::eval::repeated_cv_auc_distribution(
                    &data,
                    &spec,
                    design.repeats,
                    design.folds,
                    derive_u64(
                        cfg.master_seed,
                        "anova",
                        &format!("folds_{}_{}_{}", direction.name(), k, kind.name()),
                        0,
                    ),
                )?;
                for auc in aucs {
                    samples.push(NetworkAucSample {
                        source: direction,
                        keyword_size: k,
                        classifier: kind,
                        auc,
                    });
                }
            }
        }
    }
    Ok(samples)
}
