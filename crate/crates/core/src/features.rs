//! Classifier inputs: expert and mined keyword sets, presence vectors,
//! information-gain ranking, character-normalized network rates, and the
//! positive-predictive keyword table.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::StemmedDoc;

/// The class of one user-month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Sick,
    NotSick,
}

impl Label {
    pub fn is_sick(self) -> bool {
        matches!(self, Label::Sick)
    }

    pub fn from_sick(sick: bool) -> Self {
        if sick {
            Label::Sick
        } else {
            Label::NotSick
        }
    }
}

/// A fixed-length numeric feature vector tagged with the schema that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub schema_id: String,
    pub values: Vec<f64>,
}

/// One labeled instance; the id is the user-month it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub values: Vec<f64>,
    pub label: Label,
}

/// Labeled instances under one feature schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    schema_id: String,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema_id: impl Into<String>) -> Self {
        Dataset {
            schema_id: schema_id.into(),
            instances: Vec::new(),
        }
    }

    /// Append an instance, enforcing the uniform-schema invariant.
    pub fn push(&mut self, fv: FeatureVector, label: Label, id: impl Into<String>) -> Result<()> {
        if fv.schema_id != self.schema_id {
            return Err(Error::SchemaMismatch {
                expected: self.schema_id.clone(),
                got: fv.schema_id,
            });
        }
        if let Some(first) = self.instances.first() {
            if first.values.len() != fv.values.len() {
                return Err(Error::Validation(format!(
                    "feature length {} does not match dataset width {}",
                    fv.values.len(),
                    first.values.len()
                )));
            }
        }
        self.instances.push(Instance {
            id: id.into(),
            values: fv.values,
            label,
        });
        Ok(())
    }

    pub fn schema_id(&self) -> &str {
        &self.schema_id
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.instances.first().map_or(0, |i| i.values.len())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn has_both_classes(&self) -> bool {
        let mut sick = false;
        let mut not = false;
        for i in &self.instances {
            if i.label.is_sick() {
                sick = true;
            } else {
                not = true;
            }
        }
        sick && not
    }

    /// Rebuild the i-th instance's tagged vector.
    pub fn vector(&self, i: usize) -> FeatureVector {
        FeatureVector {
            schema_id: self.schema_id.clone(),
            values: self.instances[i].values.clone(),
        }
    }

    /// A new dataset holding the selected instances, same schema.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema_id: self.schema_id.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }
}

/// Where a keyword set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Expert,
    MinedTopK(usize),
}

/// An ordered set of keyword stems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub keywords: Vec<String>,
    pub provenance: Provenance,
}

/// The hand-chosen keyword stems.
pub const EXPERT_STEMS: [&str; 7] = [
    "flu", "influenza", "sick", "cough", "cold", "medicin", "fever",
];

impl KeywordSet {
    pub fn new(keywords: Vec<String>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashSet::new();
        for k in &keywords {
            if !seen.insert(k.as_str()) {
                return Err(Error::Validation(format!("duplicate keyword `{k}`")));
            }
            // entries are stemmer outputs; the stemmer is not idempotent, so
            // only lowercase/delimiter hygiene can be checked here
            if *k != k.to_lowercase() || k.chars().any(crate::textprep::is_delimiter) {
                return Err(Error::Validation(format!(
                    "keyword `{k}` is not a clean lowercase token"
                )));
            }
        }
        Ok(KeywordSet {
            keywords,
            provenance,
        })
    }

    pub fn expert() -> Self {
        KeywordSet {
            keywords: EXPERT_STEMS.iter().map(|s| s.to_string()).collect(),
            provenance: Provenance::Expert,
        }
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    /// A schema tag unique to this keyword list.
    pub fn schema_id(&self) -> String {
        let mut hash: u64 = 0xcbf29ce484222325;
        for k in &self.keywords {
            for b in k.as_bytes() {
                hash ^= *b as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
            hash ^= 0x1f;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        match self.provenance {
            Provenance::Expert => format!("expert:{:08x}", hash as u32),
            Provenance::MinedTopK(k) => format!("mined_k{k}:{:08x}", hash as u32),
        }
    }
}

/// A stem's occurrence rate when sick over its rate when not sick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordRatio {
    pub keyword: String,
    pub ratio: f64,
}

/// 1.0 for every keyword that occurs in any of the month's documents.
pub fn presence_vector(docs: &[StemmedDoc], ks: &KeywordSet) -> FeatureVector {
    let present: HashSet<&str> = docs
        .iter()
        .flat_map(|d| d.stems.iter().map(String::as_str))
        .collect();
    FeatureVector {
        schema_id: format!("presence:{}", ks.schema_id()),
        values: ks
            .keywords
            .iter()
            .map(|k| if present.contains(k.as_str()) { 1.0 } else { 0.0 })
            .collect(),
    }
}

/// Stems ranked by descending total occurrence count, ties broken
/// lexicographically, truncated to `max_size`.
pub fn build_vocabulary<'a, I>(docs: I, max_size: usize) -> Vec<String>
where
    I: IntoIterator<Item = &'a StemmedDoc>,
{
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        for stem in &doc.stems {
            *counts.entry(stem.as_str()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    // BTreeMap iteration is lexicographic, so a stable sort by count keeps
    // the tie-break
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    ranked
        .into_iter()
        .take(max_size)
        .map(|(s, _)| s.to_string())
        .collect()
}

fn entropy(p: f64) -> f64 {
    let mut h = 0.0;
    for q in [p, 1.0 - p] {
        if q > 0.0 {
            h -= q * q.log2();
        }
    }
    h
}

/// H(label) - H(label | presence), in bits.
pub fn information_gain(presence: &[bool], labels: &[Label]) -> Result<f64> {
    if presence.len() != labels.len() {
        return Err(Error::Validation(
            "presence/label length mismatch".into(),
        ));
    }
    let n = labels.len();
    if n == 0 {
        return Err(Error::InsufficientData("information_gain on empty data".into()));
    }
    let nf = n as f64;
    let sick = labels.iter().filter(|l| l.is_sick()).count() as f64;
    let mut present = 0usize;
    let mut present_sick = 0usize;
    for (&p, l) in presence.iter().zip(labels) {
        if p {
            present += 1;
            if l.is_sick() {
                present_sick += 1;
            }
        }
    }
    let absent = n - present;
    let absent_sick = sick as usize - present_sick;
    let h_label = entropy(sick / nf);
    let mut h_cond = 0.0;
    if present > 0 {
        h_cond += (present as f64 / nf) * entropy(present_sick as f64 / present as f64);
    }
    if absent > 0 {
        h_cond += (absent as f64 / nf) * entropy(absent_sick as f64 / absent as f64);
    }
    Ok((h_label - h_cond).max(0.0))
}

/// Rank vocabulary indices by descending information gain; ties keep
/// vocabulary order.
pub fn rank_by_information_gain(
    presence_by_keyword: &[Vec<bool>],
    labels: &[Label],
) -> Result<Vec<usize>> {
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(presence_by_keyword.len());
    for (idx, presence) in presence_by_keyword.iter().enumerate() {
        scored.push((idx, information_gain(presence, labels)?));
    }
    // stable sort keeps vocabulary order on ties
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    Ok(scored.into_iter().map(|(i, _)| i).collect())
}

/// Top-k vocabulary stems by information gain against the labels.
pub fn mine_keywords<D>(
    instance_docs: &[D],
    labels: &[Label],
    vocab: &[String],
    k: usize,
) -> Result<KeywordSet>
where
    D: AsRef<[StemmedDoc]>,
{
    if k > vocab.len() {
        return Err(Error::Validation(format!(
            "k = {k} exceeds vocabulary size {}",
            vocab.len()
        )));
    }
    let sets: Vec<HashSet<&str>> = instance_docs
        .iter()
        .map(|docs| {
            docs.as_ref()
                .iter()
                .flat_map(|d| d.stems.iter().map(String::as_str))
                .collect()
        })
        .collect();
    let presence: Vec<Vec<bool>> = vocab
        .iter()
        .map(|w| sets.iter().map(|s| s.contains(w.as_str())).collect())
        .collect();
    let order = rank_by_information_gain(&presence, labels)?;
    let keywords = order[..k].iter().map(|&i| vocab[i].clone()).collect();
    KeywordSet::new(keywords, Provenance::MinedTopK(k))
}

/// Keyword occurrence counts divided by the stream's total character count;
/// all zeros when the stream is empty.
pub fn normalized_rate_vector(
    stream: &[StemmedDoc],
    total_char_count: u64,
    ks: &KeywordSet,
) -> FeatureVector {
    let schema_id = format!("rate:{}", ks.schema_id());
    if total_char_count == 0 {
        return FeatureVector {
            schema_id,
            values: vec![0.0; ks.len()],
        };
    }
    let mut counts: BTreeMap<&str, u64> = ks.keywords.iter().map(|k| (k.as_str(), 0)).collect();
    for doc in stream {
        for stem in &doc.stems {
            if let Some(c) = counts.get_mut(stem.as_str()) {
                *c += 1;
            }
        }
    }
    FeatureVector {
        schema_id,
        values: ks
            .keywords
            .iter()
            .map(|k| counts[k.as_str()] as f64 / total_char_count as f64)
            .collect(),
    }
}

/// Per-stem occurrence-rate ratios (sick over not-sick), add-one smoothed
/// over the joint vocabulary, top n by ratio.
pub fn top_predictive_keywords<D>(
    instance_docs: &[D],
    labels: &[Label],
    n: usize,
) -> Result<Vec<KeywordRatio>>
where
    D: AsRef<[StemmedDoc]>,
{
    if instance_docs.len() != labels.len() {
        return Err(Error::Validation("docs/label length mismatch".into()));
    }
    let mut sick_counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut not_counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut sick_total = 0u64;
    let mut not_total = 0u64;
    let mut saw_sick = false;
    let mut saw_not = false;
    for (docs, label) in instance_docs.iter().zip(labels) {
        let (counts, total) = if label.is_sick() {
            saw_sick = true;
            (&mut sick_counts, &mut sick_total)
        } else {
            saw_not = true;
            (&mut not_counts, &mut not_total)
        };
        for doc in docs.as_ref() {
            for stem in &doc.stems {
                *counts.entry(stem.as_str()).or_insert(0) += 1;
                *total += 1;
            }
        }
    }
    if !saw_sick || !saw_not {
        return Err(Error::SingleClass);
    }
    let vocab: HashSet<&str> = sick_counts.keys().chain(not_counts.keys()).copied().collect();
    let v = vocab.len() as f64;
    let mut ratios: Vec<KeywordRatio> = vocab
        .into_iter()
        .map(|w| {
            let rate_sick = (sick_counts.get(w).copied().unwrap_or(0) as f64 + 1.0)
                / (sick_total as f64 + v);
            let rate_not = (not_counts.get(w).copied().unwrap_or(0) as f64 + 1.0)
                / (not_total as f64 + v);
            KeywordRatio {
                keyword: w.to_string(),
                ratio: rate_sick / rate_not,
            }
        })
        .collect();
    ratios.sort_by(|a, b| {
        b.ratio
            .partial_cmp(&a.ratio)
            .unwrap()
            .then_with(|| a.keyword.cmp(&b.keyword))
    });
    ratios.truncate(n);
    Ok(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::{preprocess, Stoplist};
    use proptest::prelude::*;

    fn doc(text: &str) -> StemmedDoc {
        preprocess(text, &Stoplist::default())
    }

    fn labels(pattern: &str) -> Vec<Label> {
        pattern
            .chars()
            .map(|c| Label::from_sick(c == 's'))
            .collect()
    }

    #[test]
    fn presence_over_expert_set() {
        let month = vec![doc("got the flu")];
        let v = presence_vector(&month, &KeywordSet::expert());
        assert_eq!(v.values, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let empty = presence_vector(&[], &KeywordSet::expert());
        assert!(empty.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn presence_ignores_tweet_order() {
        let a = vec![doc("flu season"), doc("feeling sick today")];
        let b = vec![doc("feeling sick today"), doc("flu season")];
        let ks = KeywordSet::expert();
        assert_eq!(presence_vector(&a, &ks).values, presence_vector(&b, &ks).values);
    }

    #[test]
    fn vocabulary_ranking() {
        let docs = [doc("aa aa bb"), doc("aa")];
        assert_eq!(build_vocabulary(docs.iter(), 2), vec!["aa", "bb"]);
        // tie broken lexicographically
        let docs = [doc("bb aa")];
        assert_eq!(build_vocabulary(docs.iter(), 2), vec!["aa", "bb"]);
        assert_eq!(build_vocabulary(docs.iter(), 1), vec!["aa"]);
    }

    #[test]
    fn information_gain_anchors() {
        // perfect predictor, balanced labels
        let p = vec![true, true, false, false];
        let l = labels("ssnn");
        assert!((information_gain(&p, &l).unwrap() - 1.0).abs() < 1e-12);
        // independent of the label
        let p = vec![true, false, true, false];
        assert!(information_gain(&p, &l).unwrap().abs() < 1e-12);
        // six-instance hand computation:
        // H(3/6) = 1; both branches have H(1/3) = 0.9182958340544896
        let p = vec![true, true, true, false, false, false];
        let l = labels("ssnnns");
        let want = 1.0 - 0.9182958340544896;
        assert!((information_gain(&p, &l).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn mined_keywords_follow_information_gain() {
        // stem `aa` matches the label exactly, `cc` partially, `bb` not at all
        let months = [
            vec![doc("aa bb cc")],
            vec![doc("aa cc")],
            vec![doc("bb")],
            vec![doc("")],
        ];
        let l = labels("ssnn");
        let vocab = build_vocabulary(months.iter().flatten(), 100);
        let top2 = mine_keywords(&months, &l, &vocab, 2).unwrap();
        assert_eq!(top2.keywords, vec!["aa", "cc"]);
        assert_eq!(top2.provenance, Provenance::MinedTopK(2));
        let all = mine_keywords(&months, &l, &vocab, vocab.len()).unwrap();
        assert_eq!(all.keywords.len(), vocab.len());
        assert!(mine_keywords(&months, &l, &vocab, vocab.len() + 1).is_err());
        // prefix property
        assert_eq!(all.keywords[..2], top2.keywords[..]);
    }

    #[test]
    fn rate_vector_hand_case() {
        let ks = KeywordSet::expert();
        let stream = vec![doc("flu flu")];
        let v = normalized_rate_vector(&stream, 7, &ks);
        assert!((v.values[0] - 2.0 / 7.0).abs() < 1e-15);
        assert!(v.values[1..].iter().all(|&x| x == 0.0));
        let empty = normalized_rate_vector(&[], 0, &ks);
        assert!(empty.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rate_vector_shrinks_under_padding() {
        let ks = KeywordSet::expert();
        let stream = vec![doc("flu cough flu")];
        let chars = 13u64;
        let padded_chars = chars + 20;
        let v = normalized_rate_vector(&stream, chars, &ks);
        let padded = normalized_rate_vector(&stream, padded_chars, &ks);
        for (a, b) in v.values.iter().zip(&padded.values) {
            if *a > 0.0 {
                assert!(b < a);
            } else {
                assert_eq!(*b, 0.0);
            }
        }
    }

    #[test]
    fn predictive_ratio_hand_case() {
        // sick tokens: flu flu bad flu  -> totals 4; not: ok bad ok -> 3; V=4
        let months = [
            vec![doc("flu flu bad")],
            vec![doc("flu")],
            vec![doc("ok bad")],
            vec![doc("ok")],
        ];
        let l = labels("ssnn");
        let got = top_predictive_keywords(&months, &l, 10).unwrap();
        let vocab_size = 4.0; // flu, bad, ok ... plus none -- recompute below
        let _ = vocab_size;
        // V = 3 distinct stems; sick_total = 4, not_total = 3
        // flu: (3+1)/(4+3) over (0+1)/(3+3) = (4/7)/(1/6) = 24/7
        // bad: (1+1)/7 over (1+1)/6 = 6/7
        // ok:  (0+1)/7 over (2+1)/6 = 2/7
        assert_eq!(got[0].keyword, "flu");
        assert!((got[0].ratio - 24.0 / 7.0).abs() < 1e-12);
        assert_eq!(got[1].keyword, "bad");
        assert!((got[1].ratio - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(got[2].keyword, "ok");
        assert!((got[2].ratio - 2.0 / 7.0).abs() < 1e-12);
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn equal_rates_give_unit_ratio() {
        let months = [vec![doc("x y")], vec![doc("x z")]];
        let l = labels("sn");
        let got = top_predictive_keywords(&months, &l, 3).unwrap();
        let x = got.iter().find(|r| r.keyword == "x").unwrap();
        assert!((x.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_corpus_is_rejected() {
        let months = [vec![doc("x")], vec![doc("y")]];
        assert!(top_predictive_keywords(&months, &labels("ss"), 3).is_err());
    }

    proptest! {
        #[test]
        fn presence_matches_membership_oracle(
            texts in proptest::collection::vec("[a-d ]{0,16}", 0..6)
        ) {
            let docs: Vec<StemmedDoc> = texts.iter().map(|t| doc(t)).collect();
            let ks = KeywordSet::new(
                vec!["a".into(), "b".into(), "c".into()],
                Provenance::Expert,
            ).unwrap();
            let v = presence_vector(&docs, &ks);
            for (kw, &val) in ks.keywords.iter().zip(&v.values) {
                let want = docs.iter().any(|d| d.stems.iter().any(|s| s == kw));
                prop_assert_eq!(val == 1.0, want);
                prop_assert!(val == 0.0 || val == 1.0);
            }
        }

        #[test]
        fn vocabulary_matches_count_sort_oracle(
            texts in proptest::collection::vec("[a-e ]{0,16}", 1..8),
            max in 1usize..8,
        ) {
            let docs: Vec<StemmedDoc> = texts.iter().map(|t| doc(t)).collect();
            let got = build_vocabulary(docs.iter(), max);
            // oracle: full count map, sort by (-count, stem)
            let mut counts: std::collections::HashMap<String, u64> = Default::default();
            for d in &docs {
                for s in &d.stems {
                    *counts.entry(s.clone()).or_insert(0) += 1;
                }
            }
            let mut want: Vec<(String, u64)> = counts.into_iter().collect();
            want.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let want: Vec<String> = want.into_iter().take(max).map(|(s, _)| s).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn information_gain_is_a_bit_bounded(
            bits in proptest::collection::vec(any::<(bool, bool)>(), 1..40)
        ) {
            let presence: Vec<bool> = bits.iter().map(|b| b.0).collect();
            let l: Vec<Label> = bits.iter().map(|b| Label::from_sick(b.1)).collect();
            let ig = information_gain(&presence, &l).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ig));
        }

        #[test]
        fn rate_vector_matches_count_oracle(
            texts in proptest::collection::vec("[af-h ]{0,16}", 0..5)
        ) {
            let docs: Vec<StemmedDoc> = texts.iter().map(|t| doc(t)).collect();
            let chars: u64 = docs.iter().map(|d| d.source_char_count as u64).sum();
            let ks = KeywordSet::new(vec!["f".into(), "g".into()], Provenance::Expert).unwrap();
            let v = normalized_rate_vector(&docs, chars, &ks);
            for (kw, &val) in ks.keywords.iter().zip(&v.values) {
                let count = docs
                    .iter()
                    .flat_map(|d| d.stems.iter())
                    .filter(|s| *s == kw)
                    .count() as f64;
                let want = if chars == 0 { 0.0 } else { count / chars as f64 };
                prop_assert!((val - want).abs() < 1e-15);
            }
        }
    }
}
