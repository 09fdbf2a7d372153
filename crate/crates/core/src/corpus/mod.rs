//! Data model and ingestion: users, tweets, edges, annotations, the
//! user-month partition and network stream assembly, plus the synthetic
//! cohort generator.

mod jsonl;
mod synthetic;

pub use jsonl::{
    load_annotations, load_cohort, read_edges, read_tweets, read_users, write_cohort, CohortPaths,
};
pub use synthetic::{generate_synthetic_cohort, SyntheticConfig};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Label;

/// A UTC calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Validation(format!("month {month} out of range")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    pub fn of_timestamp(ts: &DateTime<Utc>) -> Self {
        YearMonth {
            year: ts.year(),
            month: ts.month() as u8,
        }
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// First instant of the month.
    pub fn start(&self) -> DateTime<Utc> {
        chrono::TimeZone::with_ymd_and_hms(&Utc, self.year, self.month as u32, 1, 0, 0, 0)
            .single()
            .expect("valid month start")
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::Validation(format!("bad month `{s}`, expected YYYY-MM")))?;
        let year: i32 = y
            .parse()
            .map_err(|_| Error::Validation(format!("bad year in `{s}`")))?;
        let month: u8 = m
            .parse()
            .map_err(|_| Error::Validation(format!("bad month in `{s}`")))?;
        YearMonth::new(year, month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An inclusive range of calendar months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub start: YearMonth,
    pub end: YearMonth,
}

impl MonthRange {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self> {
        if end < start {
            return Err(Error::Validation(format!(
                "month range end {end} precedes start {start}"
            )));
        }
        Ok(MonthRange { start, end })
    }

    pub fn contains(&self, m: YearMonth) -> bool {
        self.start <= m && m <= self.end
    }

    pub fn months(&self) -> Vec<YearMonth> {
        let mut out = Vec::new();
        let mut m = self.start;
        loop {
            out.push(m);
            if m == self.end {
                break;
            }
            m = m.next();
        }
        out
    }

    pub fn len(&self) -> usize {
        ((self.end.year - self.start.year) * 12 + self.end.month as i32
            - self.start.month as i32
            + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // construction forbids end < start
    }
}

/// One post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
}

impl TweetRecord {
    pub fn month(&self) -> YearMonth {
        YearMonth::of_timestamp(&self.timestamp)
    }
}

/// A study participant or periphery account on record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub diagnosed_month: Option<YearMonth>,
    pub is_seed: bool,
}

/// One directed follow edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub follower_id: String,
    pub followee_id: String,
}

/// Human rating: how many of a user-month's tweets are about being sick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub user_id: String,
    pub month: YearMonth,
    pub sick_tweet_count: u32,
}

/// The classification instance: one seed user in one calendar month.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserMonth {
    pub user_id: String,
    pub month: YearMonth,
    pub tweet_refs: Vec<usize>,
    pub label: Label,
}

impl UserMonth {
    pub fn instance_id(&self) -> String {
        format!("{}@{}", self.user_id, self.month)
    }
}

/// What to do with a sick user who posted nothing in the diagnosed month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroTweetSickPolicy {
    #[default]
    KeepSick,
    RelabelControl,
}

/// Whose stream to assemble relative to a user on the one-directional graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Followers,
    Friends,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Followers => "followers",
            Direction::Friends => "friends",
        }
    }
}

/// The tweets of one user-month's network side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkStream {
    /// Indices into the cohort tweet list, ascending.
    pub tweet_indices: Vec<usize>,
    /// Sum of Unicode scalar counts of the stream texts.
    pub total_chars: u64,
}

/// The full loaded study: users, tweets, edges, annotations and the window,
/// cross-linked and validated. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Cohort {
    users: Vec<UserRecord>,
    tweets: Vec<TweetRecord>,
    edges: Vec<EdgeRecord>,
    annotations: Vec<AnnotationRecord>,
    window: MonthRange,
    user_index: HashMap<String, usize>,
    tweets_by_author_month: HashMap<String, BTreeMap<YearMonth, Vec<usize>>>,
    followers_of: HashMap<String, Vec<String>>,
    friends_of: HashMap<String, Vec<String>>,
    annotation_counts: HashMap<(String, YearMonth), u32>,
}

impl Cohort {
    pub fn new(
        users: Vec<UserRecord>,
        tweets: Vec<TweetRecord>,
        edges: Vec<EdgeRecord>,
        annotations: Vec<AnnotationRecord>,
        window: MonthRange,
    ) -> Result<Cohort> {
        let mut user_index = HashMap::with_capacity(users.len());
        for (i, u) in users.iter().enumerate() {
            if u.user_id.is_empty() {
                return Err(Error::Validation("empty user_id".into()));
            }
            if user_index.insert(u.user_id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate user {}", u.user_id)));
            }
            if let Some(m) = u.diagnosed_month {
                if !window.contains(m) {
                    return Err(Error::Validation(format!(
                        "user {} diagnosed {m} outside study window",
                        u.user_id
                    )));
                }
                if !u.is_seed {
                    return Err(Error::Validation(format!(
                        "non-seed user {} carries a diagnosis",
                        u.user_id
                    )));
                }
            }
        }

        let mut known_accounts: HashSet<&str> =
            users.iter().map(|u| u.user_id.as_str()).collect();
        let mut followers_of: HashMap<String, Vec<String>> = HashMap::new();
        let mut friends_of: HashMap<String, Vec<String>> = HashMap::new();
        for e in &edges {
            if e.follower_id.is_empty() || e.followee_id.is_empty() {
                return Err(Error::Validation("empty edge endpoint".into()));
            }
            if e.follower_id == e.followee_id {
                return Err(Error::Validation(format!("self-edge on {}", e.follower_id)));
            }
            known_accounts.insert(e.follower_id.as_str());
            known_accounts.insert(e.followee_id.as_str());
            followers_of
                .entry(e.followee_id.clone())
                .or_default()
                .push(e.follower_id.clone());
            friends_of
                .entry(e.follower_id.clone())
                .or_default()
                .push(e.followee_id.clone());
        }

        let mut tweets_by_author_month: HashMap<String, BTreeMap<YearMonth, Vec<usize>>> =
            HashMap::new();
        for (i, t) in tweets.iter().enumerate() {
            if t.user_id.is_empty() {
                return Err(Error::Validation(format!("tweet {i} has empty user_id")));
            }
            if !known_accounts.contains(t.user_id.as_str()) {
                return Err(Error::Validation(format!(
                    "tweet {i} author {} is neither a user nor on the network periphery",
                    t.user_id
                )));
            }
            let m = t.month();
            if !window.contains(m) {
                return Err(Error::Validation(format!(
                    "tweet {i} at {} falls outside the study window",
                    t.timestamp
                )));
            }
            tweets_by_author_month
                .entry(t.user_id.clone())
                .or_default()
                .entry(m)
                .or_default()
                .push(i);
        }

        let mut annotation_counts = HashMap::new();
        for a in &annotations {
            let user = user_index
                .get(&a.user_id)
                .map(|&i| &users[i])
                .ok_or_else(|| {
                    Error::Validation(format!("annotation references unknown user {}", a.user_id))
                })?;
            if !user.is_seed || !window.contains(a.month) {
                return Err(Error::Validation(format!(
                    "annotation for {}@{} does not reference a study user-month",
                    a.user_id, a.month
                )));
            }
            let month_tweets = tweets_by_author_month
                .get(&a.user_id)
                .and_then(|bm| bm.get(&a.month))
                .map_or(0, |v| v.len());
            if a.sick_tweet_count as usize > month_tweets {
                return Err(Error::Validation(format!(
                    "annotation for {}@{} counts {} sick tweets but the month has {}",
                    a.user_id, a.month, a.sick_tweet_count, month_tweets
                )));
            }
            if annotation_counts
                .insert((a.user_id.clone(), a.month), a.sick_tweet_count)
                .is_some()
            {
                return Err(Error::Validation(format!(
                    "duplicate annotation for {}@{}",
                    a.user_id, a.month
                )));
            }
        }

        Ok(Cohort {
            users,
            tweets,
            edges,
            annotations,
            window,
            user_index,
            tweets_by_author_month,
            followers_of,
            friends_of,
            annotation_counts,
        })
    }

    pub fn users(&self) -> &[UserRecord] {
        &self.users
    }

    pub fn tweets(&self) -> &[TweetRecord] {
        &self.tweets
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn annotations(&self) -> &[AnnotationRecord] {
        &self.annotations
    }

    pub fn window(&self) -> MonthRange {
        self.window
    }

    pub fn seed_users(&self) -> impl Iterator<Item = &UserRecord> {
        self.users.iter().filter(|u| u.is_seed)
    }

    pub fn user(&self, user_id: &str) -> Option<&UserRecord> {
        self.user_index.get(user_id).map(|&i| &self.users[i])
    }

    /// Tweet indices of one author in one month (empty if none).
    pub fn tweets_of(&self, user_id: &str, month: YearMonth) -> &[usize] {
        self.tweets_by_author_month
            .get(user_id)
            .and_then(|bm| bm.get(&month))
            .map_or(&[], |v| v.as_slice())
    }

    /// Human-rated sick-tweet count for a user-month; absent means zero.
    pub fn annotation_count(&self, user_id: &str, month: YearMonth) -> u32 {
        self.annotation_counts
            .get(&(user_id.to_string(), month))
            .copied()
            .unwrap_or(0)
    }

    /// Tweet counts per window month for one author.
    pub fn monthly_counts(&self, user_id: &str) -> Vec<(YearMonth, u32)> {
        self.window
            .months()
            .into_iter()
            .map(|m| (m, self.tweets_of(user_id, m).len() as u32))
            .collect()
    }
}

/// One UserMonth per (seed user, window month), labeled sick iff the month
/// is the user's diagnosed month. Under `RelabelControl` a diagnosed month
/// with no tweets becomes a control instance.
pub fn partition_user_months(cohort: &Cohort, policy: ZeroTweetSickPolicy) -> Vec<UserMonth> {
    let months = cohort.window().months();
    let mut out = Vec::new();
    for user in cohort.seed_users() {
        for &month in &months {
            let tweet_refs = cohort.tweets_of(&user.user_id, month).to_vec();
            let mut label = Label::from_sick(user.diagnosed_month == Some(month));
            if label.is_sick()
                && tweet_refs.is_empty()
                && policy == ZeroTweetSickPolicy::RelabelControl
            {
                label = Label::NotSick;
            }
            out.push(UserMonth {
                user_id: user.user_id.clone(),
                month,
                tweet_refs,
                label,
            });
        }
    }
    out
}

/// All tweets posted during `month` by the accounts on one side of the
/// user's network. The user's own tweets are never included.
pub fn assemble_network_stream(
    cohort: &Cohort,
    user_id: &str,
    month: YearMonth,
    direction: Direction,
) -> Result<NetworkStream> {
    if cohort.user(user_id).is_none() {
        return Err(Error::UnknownUser(user_id.to_string()));
    }
    let accounts = match direction {
        Direction::Followers => cohort.followers_of.get(user_id),
        Direction::Friends => cohort.friends_of.get(user_id),
    };
    let mut tweet_indices = Vec::new();
    if let Some(accounts) = accounts {
        for account in accounts {
            if account == user_id {
                continue;
            }
            tweet_indices.extend_from_slice(cohort.tweets_of(account, month));
        }
    }
    tweet_indices.sort_unstable();
    tweet_indices.dedup();
    let total_chars = tweet_indices
        .iter()
        .map(|&i| cohort.tweets[i].text.chars().count() as u64)
        .sum();
    Ok(NetworkStream {
        tweet_indices,
        total_chars,
    })
}

impl NetworkStream {
    pub fn texts<'a>(&'a self, cohort: &'a Cohort) -> impl Iterator<Item = &'a str> + 'a {
        self.tweet_indices
            .iter()
            .map(move |&i| cohort.tweets[i].text.as_str())
    }
}

#[cfg(test)]
mod tests;
