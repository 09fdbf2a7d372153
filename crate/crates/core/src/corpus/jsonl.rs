//! JSONL ingestion and serialization of cohorts (UTF-8, one object per
//! line). Errors name the file and line.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Deserialize;

use crate::corpus::{
    AnnotationRecord, Cohort, EdgeRecord, MonthRange, TweetRecord, UserRecord, YearMonth,
};
use crate::error::{Error, Result};

/// The file set a cohort is loaded from.
#[derive(Debug, Clone)]
pub struct CohortPaths {
    pub users: PathBuf,
    pub tweets: PathBuf,
    pub edges: PathBuf,
    pub annotations: Option<PathBuf>,
}

impl CohortPaths {
    /// The conventional file names under one directory.
    pub fn in_dir(dir: &Path) -> Self {
        CohortPaths {
            users: dir.join("users.jsonl"),
            tweets: dir.join("tweets.jsonl"),
            edges: dir.join("edges.jsonl"),
            annotations: Some(dir.join("annotations.jsonl")),
        }
    }
}

fn parse_lines<T, F, R>(path: &Path, convert: F) -> Result<Vec<R>>
where
    T: for<'de> Deserialize<'de>,
    F: Fn(T) -> std::result::Result<R, String>,
{
    let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = path.display().to_string();
    let mut out = Vec::new();
    for (lineno, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: T = serde_json::from_str(line)
            .map_err(|e| Error::parse(&file, lineno + 1, e.to_string()))?;
        out.push(convert(raw).map_err(|msg| Error::parse(&file, lineno + 1, msg))?);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct RawUser {
    user_id: String,
    diagnosed_month: Option<String>,
    is_seed: bool,
}

#[derive(Deserialize)]
struct RawTweet {
    user_id: String,
    timestamp: String,
    text: String,
}

#[derive(Deserialize)]
struct RawEdge {
    follower_id: String,
    followee_id: String,
}

#[derive(Deserialize)]
struct RawAnnotation {
    user_id: String,
    month: String,
    sick_tweet_count: i64,
}

fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp `{s}`: {e}"))
}

pub fn read_users(path: &Path) -> Result<Vec<UserRecord>> {
    parse_lines(path, |raw: RawUser| {
        let diagnosed_month = match raw.diagnosed_month {
            None => None,
            Some(s) => Some(s.parse::<YearMonth>().map_err(|e| e.to_string())?),
        };
        Ok(UserRecord {
            user_id: raw.user_id,
            diagnosed_month,
            is_seed: raw.is_seed,
        })
    })
}

pub fn read_tweets(path: &Path) -> Result<Vec<TweetRecord>> {
    parse_lines(path, |raw: RawTweet| {
        Ok(TweetRecord {
            user_id: raw.user_id,
            timestamp: parse_timestamp(&raw.timestamp)?,
            text: raw.text,
        })
    })
}

pub fn read_edges(path: &Path) -> Result<Vec<EdgeRecord>> {
    parse_lines(path, |raw: RawEdge| {
        Ok(EdgeRecord {
            follower_id: raw.follower_id,
            followee_id: raw.followee_id,
        })
    })
}

fn read_annotations_file(path: &Path) -> Result<Vec<AnnotationRecord>> {
    parse_lines(path, |raw: RawAnnotation| {
        if raw.sick_tweet_count < 0 {
            return Err(format!("negative sick_tweet_count {}", raw.sick_tweet_count));
        }
        Ok(AnnotationRecord {
            user_id: raw.user_id,
            month: raw.month.parse::<YearMonth>().map_err(|e| e.to_string())?,
            sick_tweet_count: raw.sick_tweet_count as u32,
        })
    })
}

/// Load and cross-link a cohort. When `window` is absent it is inferred as
/// the smallest range covering every tweet and diagnosis.
pub fn load_cohort(paths: &CohortPaths, window: Option<MonthRange>) -> Result<Cohort> {
    let users = read_users(&paths.users)?;
    let tweets = read_tweets(&paths.tweets)?;
    let edges = read_edges(&paths.edges)?;
    let annotations = match &paths.annotations {
        Some(p) if p.exists() => read_annotations_file(p)?,
        _ => Vec::new(),
    };
    let window = match window {
        Some(w) => w,
        None => {
            let months: Vec<YearMonth> = tweets
                .iter()
                .map(|t| t.month())
                .chain(users.iter().filter_map(|u| u.diagnosed_month))
                .collect();
            let (min, max) = match (months.iter().min(), months.iter().max()) {
                (Some(a), Some(b)) => (*a, *b),
                _ => {
                    return Err(Error::Config(
                        "cannot infer a study window from an empty cohort".into(),
                    ))
                }
            };
            MonthRange::new(min, max)?
        }
    };
    Cohort::new(users, tweets, edges, annotations, window)
}

/// Parse an annotation file and cross-check it against a loaded cohort.
pub fn load_annotations(path: &Path, cohort: &Cohort) -> Result<Vec<AnnotationRecord>> {
    let annotations = read_annotations_file(path)?;
    for a in &annotations {
        let user = cohort.user(&a.user_id).ok_or_else(|| {
            Error::Validation(format!("annotation references unknown user {}", a.user_id))
        })?;
        if !user.is_seed || !cohort.window().contains(a.month) {
            return Err(Error::Validation(format!(
                "annotation for {}@{} does not reference a study user-month",
                a.user_id, a.month
            )));
        }
        let month_tweets = cohort.tweets_of(&a.user_id, a.month).len();
        if a.sick_tweet_count as usize > month_tweets {
            return Err(Error::Validation(format!(
                "annotation for {}@{} counts {} sick tweets but the month has {}",
                a.user_id, a.month, a.sick_tweet_count, month_tweets
            )));
        }
    }
    Ok(annotations)
}

fn writer(path: &Path) -> Result<BufWriter<std::fs::File>> {
    Ok(BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn finish(mut w: BufWriter<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write the four JSONL files into `dir`, deterministically.
pub fn write_cohort(cohort: &Cohort, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let path = dir.join("users.jsonl");
    let mut w = writer(&path)?;
    for u in cohort.users() {
        let diagnosed = match &u.diagnosed_month {
            Some(m) => format!("\"{m}\""),
            None => "null".to_string(),
        };
        writeln!(
            w,
            "{{\"user_id\":{},\"diagnosed_month\":{},\"is_seed\":{}}}",
            serde_json::to_string(&u.user_id).unwrap(),
            diagnosed,
            u.is_seed
        )
        .map_err(|e| Error::io(&path, e))?;
    }
    finish(w, &path)?;

    let path = dir.join("tweets.jsonl");
    let mut w = writer(&path)?;
    for t in cohort.tweets() {
        writeln!(
            w,
            "{{\"user_id\":{},\"timestamp\":\"{}\",\"text\":{}}}",
            serde_json::to_string(&t.user_id).unwrap(),
            t.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
            serde_json::to_string(&t.text).unwrap()
        )
        .map_err(|e| Error::io(&path, e))?;
    }
    finish(w, &path)?;

    let path = dir.join("edges.jsonl");
    let mut w = writer(&path)?;
    for e in cohort.edges() {
        writeln!(
            w,
            "{{\"follower_id\":{},\"followee_id\":{}}}",
            serde_json::to_string(&e.follower_id).unwrap(),
            serde_json::to_string(&e.followee_id).unwrap()
        )
        .map_err(|err| Error::io(&path, err))?;
    }
    finish(w, &path)?;

    let path = dir.join("annotations.jsonl");
    let mut w = writer(&path)?;
    for a in cohort.annotations() {
        writeln!(
            w,
            "{{\"user_id\":{},\"month\":\"{}\",\"sick_tweet_count\":{}}}",
            serde_json::to_string(&a.user_id).unwrap(),
            a.month,
            a.sick_tweet_count
        )
        .map_err(|e| Error::io(&path, e))?;
    }
    finish(w, &path)
}
