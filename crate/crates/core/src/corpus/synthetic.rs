//! Seeded synthetic-cohort generator standing in for the original
//! medical-record data. Everything is a pure function of the config; all
//! randomness flows through named derived streams.

use std::collections::BTreeMap;

use chrono::Duration;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    AnnotationRecord, Cohort, EdgeRecord, MonthRange, TweetRecord, UserRecord, YearMonth,
};
use crate::error::{Error, Result};
use crate::seed::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub rng_seed: u64,
    pub n_seed_users: usize,
    /// Fraction of seed users carrying a diagnosis.
    pub sick_fraction: f64,
    /// Fraction of sick users who get at least one annotated sick tweet.
    pub self_report_rate: f64,
    pub window: MonthRange,
    /// Negative-binomial monthly tweet counts for seed users.
    pub monthly_tweet_mean: f64,
    pub monthly_tweet_dispersion: f64,
    /// Multiplicative shift of the tweet rate in the diagnosed month.
    pub sick_rate_shift: f64,
    /// Per-tweet injection probability of each word during sick months.
    pub sick_vocabulary: BTreeMap<String, f64>,
    /// Per-tweet, per-word background rate of those same words anytime.
    pub baseline_word_rate: f64,
    pub followers_mean: f64,
    pub followers_dispersion: f64,
    pub friends_mean: f64,
    pub friends_dispersion: f64,
    pub periphery_tweet_mean: f64,
    pub periphery_tweet_dispersion: f64,
    /// Per-tweet, per-word injection into follower streams in sick months.
    pub follower_sick_injection: f64,
    /// Same for friend streams.
    pub friend_sick_injection: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        let mut sick_vocabulary = BTreeMap::new();
        for (word, p) in [
            ("flu", 0.09),
            ("sick", 0.16),
            ("fever", 0.05),
            ("cough", 0.05),
            ("cold", 0.04),
            ("medicine", 0.05),
            ("recovering", 0.07),
            ("doctor", 0.06),
            ("health", 0.05),
            ("bed", 0.04),
        ] {
            sick_vocabulary.insert(word.to_string(), p);
        }
        SyntheticConfig {
            rng_seed: 0,
            n_seed_users: 226,
            sick_fraction: 104.0 / 226.0,
            self_report_rate: 17.0 / 35.0,
            window: MonthRange {
                start: YearMonth::new(2012, 9).unwrap(),
                end: YearMonth::new(2013, 4).unwrap(),
            },
            monthly_tweet_mean: 60.0,
            monthly_tweet_dispersion: 6.0,
            sick_rate_shift: 0.55,
            sick_vocabulary,
            baseline_word_rate: 0.0004,
            followers_mean: 5.0,
            followers_dispersion: 3.0,
            friends_mean: 5.0,
            friends_dispersion: 3.0,
            periphery_tweet_mean: 15.0,
            periphery_tweet_dispersion: 4.0,
            follower_sick_injection: 0.05,
            friend_sick_injection: 0.012,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_seed_users == 0 {
            return Err(Error::Config("n_seed_users must be positive".into()));
        }
        for (name, p) in [
            ("sick_fraction", self.sick_fraction),
            ("self_report_rate", self.self_report_rate),
            ("baseline_word_rate", self.baseline_word_rate),
            ("follower_sick_injection", self.follower_sick_injection),
            ("friend_sick_injection", self.friend_sick_injection),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        for (word, p) in &self.sick_vocabulary {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Config(format!(
                    "sick_vocabulary[{word}] = {p} is not a probability"
                )));
            }
        }
        for (name, r) in [
            ("monthly_tweet_mean", self.monthly_tweet_mean),
            ("monthly_tweet_dispersion", self.monthly_tweet_dispersion),
            ("sick_rate_shift", self.sick_rate_shift),
            ("followers_mean", self.followers_mean),
            ("followers_dispersion", self.followers_dispersion),
            ("friends_mean", self.friends_mean),
            ("friends_dispersion", self.friends_dispersion),
            ("periphery_tweet_mean", self.periphery_tweet_mean),
            ("periphery_tweet_dispersion", self.periphery_tweet_dispersion),
        ] {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Config(format!("{name} = {r} must be positive")));
            }
        }
        Ok(())
    }
}

/// Neutral filler vocabulary; deliberately disjoint from the default sick
/// vocabulary.
const WORD_POOL: &[&str] = &[
    "game", "night", "coffee", "class", "study", "weekend", "music", "friend", "campus", "snow",
    "rain", "sun", "movie", "pizza", "party", "football", "basketball", "library", "exam",
    "paper", "lecture", "morning", "breakfast", "lunch", "dinner", "bus", "walk", "run", "gym",
    "train", "travel", "photo", "song", "album", "show", "episode", "season", "team", "win",
    "loss", "score", "goal", "play", "practice", "work", "job", "shift", "meeting", "project",
    "deadline", "code", "book", "chapter", "story", "news", "weather", "traffic", "road",
    "city", "town", "home", "room", "house", "door", "window", "light", "dark", "sleep",
    "dream", "wake", "late", "early", "time", "hour", "minute", "week", "month", "year",
    "birthday", "gift", "card", "letter", "phone", "call", "text", "tweet", "post", "share",
    "laugh", "smile", "cry", "happy", "sad", "angry", "tired", "bored", "excited", "nervous",
    "calm", "quiet", "loud", "crazy", "weird", "funny", "serious", "simple", "hard", "easy",
    "new", "old", "big", "small", "long", "short", "fast", "slow", "hot", "warm",
    "cool", "ice", "fire", "water", "tea", "juice", "soda", "cake", "cookie", "bread",
    "cheese", "salad", "soup", "rice", "pasta", "chicken", "beef", "fish", "fruit", "apple",
    "banana", "orange", "grape", "berry", "melon", "garden", "tree", "flower", "grass", "leaf",
    "bird", "dog", "cat", "horse", "mouse", "lion", "tiger", "bear", "wolf", "fox",
    "river", "lake", "ocean", "beach", "mountain", "hill", "valley", "forest", "desert", "island",
    "star", "moon", "cloud", "wind", "storm", "thunder", "spring", "summer", "autumn", "winter",
    "north", "south", "east", "west", "left", "right", "front", "back", "top", "bottom",
    "first", "second", "third", "last", "next", "final", "start", "finish", "begin", "end",
];

struct TweetFactory<'a> {
    config: &'a SyntheticConfig,
    month_starts: BTreeMap<YearMonth, (chrono::DateTime<chrono::Utc>, i64)>,
}

impl<'a> TweetFactory<'a> {
    fn new(config: &'a SyntheticConfig) -> Self {
        let mut month_starts = BTreeMap::new();
        for m in config.window.months() {
            let start = m.start();
            let secs = (m.next().start() - start).num_seconds();
            month_starts.insert(m, (start, secs));
        }
        TweetFactory {
            config,
            month_starts,
        }
    }

    fn base_text(&self, rng: &mut ChaCha8Rng) -> String {
        let n_words = rng.gen_range(4..=12);
        let mut words = Vec::with_capacity(n_words + 4);
        for _ in 0..n_words {
            words.push(*WORD_POOL.choose(rng).expect("non-empty pool"));
        }
        words.join(" ")
    }

    /// One tweet. Sick-vocabulary words are appended at the background rate
    /// plus, depending on the mode, the configured per-word profile (seed
    /// users in their diagnosed month) or a flat injection probability
    /// (network accounts during that month).
    fn tweet(
        &self,
        rng: &mut ChaCha8Rng,
        author: &str,
        month: YearMonth,
        mode: VocabMode,
    ) -> TweetRecord {
        let mut text = self.base_text(rng);
        for (word, p_profile) in &self.config.sick_vocabulary {
            let extra = match mode {
                VocabMode::Plain => 0.0,
                VocabMode::SickProfile => *p_profile,
                VocabMode::Flat(q) => q,
            };
            let p = (self.config.baseline_word_rate + extra).min(1.0);
            if p > 0.0 && rng.gen_bool(p) {
                text.push(' ');
                text.push_str(word);
            }
        }
        let (start, secs) = self.month_starts[&month];
        TweetRecord {
            user_id: author.to_string(),
            timestamp: start + Duration::seconds(rng.gen_range(0..secs)),
            text,
        }
    }
}

#[derive(Clone, Copy)]
enum VocabMode {
    Plain,
    SickProfile,
    Flat(f64),
}

fn neg_binomial(rng: &mut ChaCha8Rng, mean: f64, dispersion: f64) -> u32 {
    let gamma = Gamma::new(dispersion, mean / dispersion).expect("validated parameters");
    let rate: f64 = gamma.sample(rng);
    if rate <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(rate.max(1e-12)).expect("positive rate");
    poisson.sample(rng) as u32
}

/// Generate a fully validated cohort from the config. Pure in the config,
/// seed included.
pub fn generate_synthetic_cohort(config: &SyntheticConfig) -> Result<Cohort> {
    config.validate()?;
    let months = config.window.months();
    let factory = TweetFactory::new(config);

    // who is sick, and which sick users self-report
    let n = config.n_seed_users;
    let n_sick = (n as f64 * config.sick_fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(config.rng_seed, "synthetic", "sick_users", 0));
    let mut diagnosed = vec![None; n];
    let mut self_reporter = vec![false; n];
    {
        let mut rng = stream_rng(config.rng_seed, "synthetic", "diagnosis_month", 0);
        for &u in order.iter().take(n_sick) {
            diagnosed[u] = Some(months[rng.gen_range(0..months.len())]);
        }
        let n_reporters = (n_sick as f64 * config.self_report_rate).round() as usize;
        for &u in order.iter().take(n_sick).take(n_reporters) {
            self_reporter[u] = true;
        }
    }

    let mut users = Vec::with_capacity(n);
    let mut tweets = Vec::new();
    let mut edges = Vec::new();
    let mut annotations = Vec::new();

    for idx in 0..n {
        let user_id = format!("u{idx:05}");
        users.push(UserRecord {
            user_id: user_id.clone(),
            diagnosed_month: diagnosed[idx],
            is_seed: true,
        });

        let mut rng = stream_rng(config.rng_seed, "synthetic", "seed_tweets", idx as u64);
        for &month in &months {
            let sick_month = diagnosed[idx] == Some(month);
            let mean = if sick_month {
                config.monthly_tweet_mean * config.sick_rate_shift
            } else {
                config.monthly_tweet_mean
            };
            let mut count = neg_binomial(&mut rng, mean, config.monthly_tweet_dispersion);
            let mut forced_reports = 0u32;
            if sick_month && self_reporter[idx] {
                count = count.max(1);
                forced_reports = 1 + rng.gen_range(0..2u32.min(count));
            }
            for t in 0..count {
                let mode = if sick_month {
                    VocabMode::SickProfile
                } else {
                    VocabMode::Plain
                };
                let mut tweet = factory.tweet(&mut rng, &user_id, month, mode);
                if t < forced_reports {
                    tweet.text.push_str(" so sick with the flu today");
                }
                tweets.push(tweet);
            }
            if forced_reports > 0 {
                annotations.push(AnnotationRecord {
                    user_id: user_id.clone(),
                    month,
                    sick_tweet_count: forced_reports,
                });
            }
        }
    }

    // network periphery: distinct follower/friend accounts per seed user
    for idx in 0..n {
        let user_id = format!("u{idx:05}");
        let mut rng = stream_rng(config.rng_seed, "synthetic", "network", idx as u64);
        let n_followers =
            neg_binomial(&mut rng, config.followers_mean, config.followers_dispersion) as usize;
        let n_friends =
            neg_binomial(&mut rng, config.friends_mean, config.friends_dispersion) as usize;
        for j in 0..n_followers.max(1) {
            let account = format!("p{idx:05}f{j:03}");
            edges.push(EdgeRecord {
                follower_id: account.clone(),
                followee_id: user_id.clone(),
            });
            emit_periphery_tweets(
                config,
                &factory,
                &mut rng,
                &account,
                diagnosed[idx],
                config.follower_sick_injection,
                &months,
                &mut tweets,
            );
        }
        for j in 0..n_friends.max(1) {
            let account = format!("p{idx:05}r{j:03}");
            edges.push(EdgeRecord {
                follower_id: user_id.clone(),
                followee_id: account.clone(),
            });
            emit_periphery_tweets(
                config,
                &factory,
                &mut rng,
                &account,
                diagnosed[idx],
                config.friend_sick_injection,
                &months,
                &mut tweets,
            );
        }
    }

    Cohort::new(users, tweets, edges, annotations, config.window)
}

#[allow(clippy::too_many_arguments)]
fn emit_periphery_tweets(
    config: &SyntheticConfig,
    factory: &TweetFactory<'_>,
    rng: &mut ChaCha8Rng,
    account: &str,
    diagnosed: Option<YearMonth>,
    injection: f64,
    months: &[YearMonth],
    tweets: &mut Vec<TweetRecord>,
) {
    for &month in months {
        let count = neg_binomial(
            rng,
            config.periphery_tweet_mean,
            config.periphery_tweet_dispersion,
        );
        let mode = if diagnosed == Some(month) {
            VocabMode::Flat(injection)
        } else {
            VocabMode::Plain
        };
        for _ in 0..count {
            tweets.push(factory.tweet(rng, account, month, mode));
        }
    }
}
