//! Stacked meta-classification: pick the AUC-best candidate per signal
//! family, pack the five held-out probabilities into meta features, and
//! evaluate second-level learners by leave-one-out cross-validation.

mod signals;

pub use signals::{
    compute_base_signals, network_auc_samples, CandidateEval, IgScope, NetworkAnovaDesign,
    NetworkAucSample, SignalConfig, SignalsOutput,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{loocv, EvalReport};
use crate::features::{Dataset, FeatureVector, Label};
use crate::learners::AlgorithmKind;

/// The five base signal families, in fixed feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalFamily {
    ExpertKeywords,
    MinedKeywords,
    Human,
    Anomaly,
    Network,
}

pub const SIGNAL_FAMILIES: [SignalFamily; 5] = [
    SignalFamily::ExpertKeywords,
    SignalFamily::MinedKeywords,
    SignalFamily::Human,
    SignalFamily::Anomaly,
    SignalFamily::Network,
];

impl SignalFamily {
    pub fn name(self) -> &'static str {
        match self {
            SignalFamily::ExpertKeywords => "expert",
            SignalFamily::MinedKeywords => "mined",
            SignalFamily::Human => "human",
            SignalFamily::Anomaly => "anomaly",
            SignalFamily::Network => "network",
        }
    }
}

/// One candidate's cross-validated performance within a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyEval {
    pub family: SignalFamily,
    pub candidate: String,
    pub auc: f64,
    pub accuracy: f64,
}

/// Argmax-AUC candidate per family; ties keep the earlier candidate in
/// declared order. Every family must be represented.
pub fn select_best_per_family(evals: &[FamilyEval]) -> Result<BTreeMap<SignalFamily, FamilyEval>> {
    let mut best: BTreeMap<SignalFamily, FamilyEval> = BTreeMap::new();
    for e in evals {
        match best.get(&e.family) {
            Some(cur) if e.auc <= cur.auc => {}
            _ => {
                best.insert(e.family, e.clone());
            }
        }
    }
    for family in SIGNAL_FAMILIES {
        if !best.contains_key(&family) {
            return Err(Error::MissingFamily(family.name().to_string()));
        }
    }
    Ok(best)
}

/// One instance's five held-out base-signal probabilities. `None` marks a
/// signal that was never filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseSignalBundle {
    pub instance_id: String,
    pub p_expert: Option<f64>,
    pub p_mined: Option<f64>,
    pub p_human: Option<f64>,
    pub p_anomaly: Option<f64>,
    pub p_network: Option<f64>,
}

impl BaseSignalBundle {
    pub fn new(instance_id: impl Into<String>) -> Self {
        BaseSignalBundle {
            instance_id: instance_id.into(),
            p_expert: None,
            p_mined: None,
            p_human: None,
            p_anomaly: None,
            p_network: None,
        }
    }

    fn as_vector(&self) -> Result<Vec<f64>> {
        let fields = [
            ("expert", self.p_expert),
            ("mined", self.p_mined),
            ("human", self.p_human),
            ("anomaly", self.p_anomaly),
            ("network", self.p_network),
        ];
        let mut values = Vec::with_capacity(5);
        for (signal, v) in fields {
            let v = v.ok_or_else(|| Error::MissingSignal {
                instance: self.instance_id.clone(),
                signal: signal.to_string(),
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!(
                    "signal {signal} of {} is {v}, not a probability",
                    self.instance_id
                )));
            }
            values.push(v);
        }
        Ok(values)
    }
}

pub const META_SCHEMA: &str = "meta:v1";

/// Pack bundles into the 5-feature meta dataset, labels carried through.
pub fn build_meta_dataset(bundles: &[BaseSignalBundle], labels: &[Label]) -> Result<Dataset> {
    if bundles.len() != labels.len() {
        return Err(Error::Validation("bundle/label length mismatch".into()));
    }
    let mut data = Dataset::new(META_SCHEMA);
    for (bundle, label) in bundles.iter().zip(labels) {
        data.push(
            FeatureVector {
                schema_id: META_SCHEMA.into(),
                values: bundle.as_vector()?,
            },
            *label,
            bundle.instance_id.clone(),
        )?;
    }
    Ok(data)
}

/// The second-level learners the pipeline evaluates.
pub const META_KINDS: [AlgorithmKind; 5] = [
    AlgorithmKind::AdaBoost,
    AlgorithmKind::NaiveBayes,
    AlgorithmKind::DecisionTree,
    AlgorithmKind::LogitBoost,
    AlgorithmKind::WeightedVote,
];

/// Leave-one-out evaluation of one meta learner on the packed dataset.
pub fn evaluate_meta(
    spec: &crate::learners::AlgorithmSpec,
    meta_dataset: &Dataset,
    seed: u64,
) -> Result<EvalReport> {
    if !META_KINDS.contains(&spec.kind) {
        return Err(Error::Config(format!(
            "{} is not one of the meta learners",
            spec.kind.name()
        )));
    }
    if meta_dataset.len() < 2 {
        return Err(Error::InsufficientData(
            "meta evaluation needs at least 2 instances".into(),
        ));
    }
    let scores = loocv(meta_dataset, spec, seed)?;
    let ids: Vec<String> = meta_dataset
        .instances()
        .iter()
        .map(|i| i.id.clone())
        .collect();
    EvalReport::from_scores(&ids, &meta_dataset.labels(), &scores, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::AlgorithmSpec;
    use proptest::prelude::*;

    fn eval(family: SignalFamily, candidate: &str, auc: f64) -> FamilyEval {
        FamilyEval {
            family,
            candidate: candidate.into(),
            auc,
            accuracy: 0.0,
        }
    }

    fn full_bundle(id: &str, values: [f64; 5]) -> BaseSignalBundle {
        BaseSignalBundle {
            instance_id: id.into(),
            p_expert: Some(values[0]),
            p_mined: Some(values[1]),
            p_human: Some(values[2]),
            p_anomaly: Some(values[3]),
            p_network: Some(values[4]),
        }
    }

    fn complete_evals() -> Vec<FamilyEval> {
        vec![
            eval(SignalFamily::ExpertKeywords, "a", 0.7),
            eval(SignalFamily::ExpertKeywords, "b", 0.9),
            eval(SignalFamily::ExpertKeywords, "c", 0.8),
            eval(SignalFamily::MinedKeywords, "only", 0.6),
            eval(SignalFamily::Human, "h", 0.74),
            eval(SignalFamily::Anomaly, "z", 0.62),
            eval(SignalFamily::Network, "n", 0.8),
        ]
    }

    #[test]
    fn argmax_per_family() {
        let best = select_best_per_family(&complete_evals()).unwrap();
        assert_eq!(best[&SignalFamily::ExpertKeywords].candidate, "b");
        assert_eq!(best[&SignalFamily::MinedKeywords].candidate, "only");
        // ties keep the earlier candidate
        let mut evals = complete_evals();
        evals.push(eval(SignalFamily::ExpertKeywords, "later", 0.9));
        assert_eq!(
            select_best_per_family(&evals).unwrap()[&SignalFamily::ExpertKeywords].candidate,
            "b"
        );
    }

    #[test]
    fn missing_family_is_an_error() {
        let evals: Vec<FamilyEval> = complete_evals()
            .into_iter()
            .filter(|e| e.family != SignalFamily::Network)
            .collect();
        assert!(matches!(
            select_best_per_family(&evals),
            Err(Error::MissingFamily(f)) if f == "network"
        ));
    }

    #[test]
    fn meta_dataset_is_identity_packing() {
        let bundles = vec![full_bundle("u1@2013-01", [0.9, 0.8, 1.0, 0.3, 0.6])];
        let data = build_meta_dataset(&bundles, &[Label::Sick]).unwrap();
        assert_eq!(data.instances()[0].values, vec![0.9, 0.8, 1.0, 0.3, 0.6]);
        assert_eq!(data.instances()[0].id, "u1@2013-01");
        let empty = build_meta_dataset(&[], &[]).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn incomplete_bundle_names_instance_and_signal() {
        let mut b = full_bundle("u7@2013-02", [0.1; 5]);
        b.p_anomaly = None;
        match build_meta_dataset(&[b], &[Label::Sick]) {
            Err(Error::MissingSignal { instance, signal }) => {
                assert_eq!(instance, "u7@2013-02");
                assert_eq!(signal, "anomaly");
            }
            other => panic!("expected MissingSignal, got {other:?}"),
        }
    }

    #[test]
    fn meta_learner_set_is_enforced() {
        let bundles: Vec<BaseSignalBundle> = (0..4)
            .map(|i| full_bundle(&format!("i{i}"), [0.5; 5]))
            .collect();
        let labels = vec![Label::Sick, Label::NotSick, Label::Sick, Label::NotSick];
        let data = build_meta_dataset(&bundles, &labels).unwrap();
        let err = evaluate_meta(
            &AlgorithmSpec::new(AlgorithmKind::LogisticRegression),
            &data,
            0,
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn dominant_signal_gives_perfect_meta_auc() {
        // p_mined separates the classes perfectly
        let mut bundles = Vec::new();
        let mut labels = Vec::new();
        for i in 0..12 {
            let sick = i % 3 == 0;
            let p_mined = if sick { 0.9 } else { 0.1 };
            bundles.push(full_bundle(&format!("i{i}"), [0.5, p_mined, 0.5, 0.5, 0.5]));
            labels.push(Label::from_sick(sick));
        }
        let data = build_meta_dataset(&bundles, &labels).unwrap();
        for kind in [
            AlgorithmKind::DecisionTree,
            AlgorithmKind::LogitBoost,
            AlgorithmKind::AdaBoost,
        ] {
            let report = evaluate_meta(&AlgorithmSpec::new(kind), &data, 3).unwrap();
            assert_eq!(report.auc, 1.0, "{}", kind.name());
        }
    }

    #[test]
    fn constant_signals_are_uninformative() {
        let mut bundles = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            bundles.push(full_bundle(&format!("i{i}"), [0.5; 5]));
            labels.push(Label::from_sick(i % 2 == 0));
        }
        let data = build_meta_dataset(&bundles, &labels).unwrap();
        // learners with constant output under constant features score 0.5
        for kind in [
            AlgorithmKind::AdaBoost,
            AlgorithmKind::LogitBoost,
            AlgorithmKind::WeightedVote,
        ] {
            let report = evaluate_meta(&AlgorithmSpec::new(kind), &data, 1).unwrap();
            assert_eq!(report.auc, 0.5, "{}", kind.name());
        }
        // prior-driven learners pick up the leave-one-out prior artifact,
        // which can only hurt, never help
        for kind in [AlgorithmKind::NaiveBayes, AlgorithmKind::DecisionTree] {
            let report = evaluate_meta(&AlgorithmSpec::new(kind), &data, 1).unwrap();
            assert!(report.auc <= 0.5, "{}: {}", kind.name(), report.auc);
        }
    }

    proptest! {
        /// Selection matches a plain argmax oracle.
        #[test]
        fn selection_matches_argmax_oracle(
            aucs in proptest::collection::vec(0.0f64..1.0, 5..20)
        ) {
            let evals: Vec<FamilyEval> = aucs
                .iter()
                .enumerate()
                .map(|(i, &auc)| {
                    eval(SIGNAL_FAMILIES[i % 5], &format!("c{i}"), auc)
                })
                .collect();
            prop_assume!(SIGNAL_FAMILIES.iter().all(|f| evals.iter().any(|e| e.family == *f)));
            let best = select_best_per_family(&evals).unwrap();
            for family in SIGNAL_FAMILIES {
                let want = evals
                    .iter()
                    .filter(|e| e.family == family)
                    .fold(None::<&FamilyEval>, |acc, e| match acc {
                        Some(cur) if e.auc <= cur.auc => Some(cur),
                        _ => Some(e),
                    })
                    .unwrap();
                prop_assert_eq!(&best[&family].candidate, &want.candidate);
            }
        }
    }
}
