//! Experiment configuration: one TOML file driving data selection, signal
//! computation, meta evaluation and the variance analysis. Flags and
//! FLUSCOPE_* environment variables override the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fluscope_core::corpus::{
    load_cohort, Cohort, CohortPaths, MonthRange, SyntheticConfig, ZeroTweetSickPolicy,
};
use fluscope_core::learners::AlgorithmKind;
use fluscope_core::meta::{IgScope, SignalConfig};
use fluscope_core::seed::derive_u64;
use fluscope_core::textprep::Stoplist;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub out_dir: Option<PathBuf>,
    /// 0 lets the runtime pick.
    pub threads: usize,
    pub data: DataConfig,
    pub signals: SignalsSection,
    pub meta: MetaSection,
    pub anova: AnovaSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// "synthetic" or "files".
    pub mode: String,
    /// Directory holding users/tweets/edges/annotations.jsonl (files mode).
    pub dir: Option<PathBuf>,
    /// Optional explicit study window (files mode).
    pub window: Option<WindowSection>,
    pub synthetic: SyntheticConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowSection {
    pub start: String,
    pub end: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            mode: "synthetic".into(),
            dir: None,
            window: None,
            synthetic: SyntheticConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalsSection {
    pub cv_folds: usize,
    pub expert_classifiers: Vec<String>,
    pub mined_classifiers: Vec<String>,
    pub network_classifiers: Vec<String>,
    pub mined_k: Vec<usize>,
    pub network_k: Vec<usize>,
    pub vocabulary_cap: usize,
    /// "per_fold" (no test leakage) or "full".
    pub ig_scope: String,
    pub human_epsilon: f64,
    pub anomaly_graded: bool,
    /// "keep_sick" or "relabel_control".
    pub zero_tweet_sick_policy: String,
    /// Stop-word list path; the vendored list when absent.
    pub stopwords: Option<PathBuf>,
}

impl Default for SignalsSection {
    fn default() -> Self {
        let d = SignalConfig::default();
        SignalsSection {
            cv_folds: d.cv_folds,
            expert_classifiers: d.expert_classifiers.iter().map(|k| k.name().into()).collect(),
            mined_classifiers: d.mined_classifiers.iter().map(|k| k.name().into()).collect(),
            network_classifiers: d
                .network_classifiers
                .iter()
                .map(|k| k.name().into())
                .collect(),
            mined_k: d.mined_k,
            network_k: d.network_k,
            vocabulary_cap: d.vocabulary_cap,
            ig_scope: "per_fold".into(),
            human_epsilon: d.human_epsilon,
            anomaly_graded: d.anomaly_graded,
            zero_tweet_sick_policy: "keep_sick".into(),
            stopwords: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaSection {
    pub classifiers: Vec<String>,
}

impl Default for MetaSection {
    fn default() -> Self {
        MetaSection {
            classifiers: fluscope_core::meta::META_KINDS
                .iter()
                .map(|k| k.name().into())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnovaSection {
    pub repeats: usize,
    pub folds: usize,
    pub keyword_sizes: Vec<usize>,
    pub classifiers: Vec<String>,
}

impl Default for AnovaSection {
    fn default() -> Self {
        AnovaSection {
            repeats: 10,
            folds: 5,
            keyword_sizes: vec![10, 100],
            classifiers: vec!["naive_bayes".into(), "logistic_regression".into()],
        }
    }
}

fn parse_kinds(names: &[String]) -> Result<Vec<AlgorithmKind>> {
    names
        .iter()
        .map(|n| AlgorithmKind::from_name(n).map_err(Into::into))
        .collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let contents = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ExperimentConfig = toml::from_str(&contents)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.check_seed()?;
        Ok(config)
    }

    /// TOML integers are signed; keep seeds echoable.
    pub fn check_seed(&self) -> Result<()> {
        if self.master_seed > i64::MAX as u64 {
            bail!("master_seed must fit in 63 bits");
        }
        Ok(())
    }

    /// The effective synthetic config: its seed is always derived from the
    /// master seed so one knob controls the whole run.
    pub fn synthetic_config(&self) -> SyntheticConfig {
        let mut c = self.data.synthetic.clone();
        c.rng_seed = derive_u64(self.master_seed, "cli", "synthetic_cohort", 0);
        c
    }

    pub fn zero_tweet_policy(&self) -> Result<ZeroTweetSickPolicy> {
        match self.signals.zero_tweet_sick_policy.as_str() {
            "keep_sick" => Ok(ZeroTweetSickPolicy::KeepSick),
            "relabel_control" => Ok(ZeroTweetSickPolicy::RelabelControl),
            other => bail!("unknown zero_tweet_sick_policy `{other}`"),
        }
    }

    pub fn signal_config(&self) -> Result<SignalConfig> {
        let stoplist = match &self.signals.stopwords {
            Some(path) => Stoplist::from_file(path)?,
            None => Stoplist::vendored(),
        };
        Ok(SignalConfig {
            master_seed: self.master_seed,
            cv_folds: self.signals.cv_folds,
            expert_classifiers: parse_kinds(&self.signals.expert_classifiers)?,
            mined_classifiers: parse_kinds(&self.signals.mined_classifiers)?,
            network_classifiers: parse_kinds(&self.signals.network_classifiers)?,
            mined_k: self.signals.mined_k.clone(),
            network_k: self.signals.network_k.clone(),
            vocabulary_cap: self.signals.vocabulary_cap,
            ig_scope: match self.signals.ig_scope.as_str() {
                "per_fold" => IgScope::PerFold,
                "full" => IgScope::Full,
                other => bail!("unknown ig_scope `{other}`"),
            },
            human_epsilon: self.signals.human_epsilon,
            anomaly_graded: self.signals.anomaly_graded,
            zero_tweet_policy: self.zero_tweet_policy()?,
            stoplist,
        })
    }

    pub fn meta_kinds(&self) -> Result<Vec<AlgorithmKind>> {
        parse_kinds(&self.meta.classifiers)
    }

    pub fn anova_kinds(&self) -> Result<Vec<AlgorithmKind>> {
        parse_kinds(&self.anova.classifiers)
    }

    pub fn window(&self) -> Result<Option<MonthRange>> {
        match &self.data.window {
            None => Ok(None),
            Some(w) => {
                let start = w.start.parse().map_err(anyhow::Error::from)?;
                let end = w.end.parse().map_err(anyhow::Error::from)?;
                Ok(Some(MonthRange::new(start, end)?))
            }
        }
    }

    /// Load (files mode) or generate (synthetic mode) the cohort.
    pub fn resolve_cohort(&self) -> Result<Cohort> {
        match self.data.mode.as_str() {
            "synthetic" => Ok(fluscope_core::corpus::generate_synthetic_cohort(
                &self.synthetic_config(),
            )?),
            "files" => {
                let dir = self
                    .data
                    .dir
                    .as_ref()
                    .context("data.mode = \"files\" requires data.dir")?;
                Ok(load_cohort(&CohortPaths::in_dir(dir), self.window()?)?)
            }
            other => bail!("unknown data.mode `{other}`"),
        }
    }

    /// Serialize the fully resolved config (master seed included) for
    /// provenance next to every artifact set.
    pub fn resolved_toml(&self) -> Result<String> {
        let mut resolved = self.clone();
        resolved.data.synthetic = self.synthetic_config();
        Ok(toml::to_string_pretty(&resolved)?)
    }
}
