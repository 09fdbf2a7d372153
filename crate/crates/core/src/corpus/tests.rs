use std::io::Write;

use crate::corpus::*;
use crate::error::Error;
use crate::features::Label;

fn ym(s: &str) -> YearMonth {
    s.parse().unwrap()
}

fn window(start: &str, end: &str) -> MonthRange {
    MonthRange::new(ym(start), ym(end)).unwrap()
}

fn tweet(user: &str, ts: &str, text: &str) -> TweetRecord {
    TweetRecord {
        user_id: user.into(),
        timestamp: chrono::DateTime::parse_from_rfc3339(ts)
            .unwrap()
            .with_timezone(&chrono::Utc),
        text: text.into(),
    }
}

fn user(id: &str, diagnosed: Option<&str>) -> UserRecord {
    UserRecord {
        user_id: id.into(),
        diagnosed_month: diagnosed.map(ym),
        is_seed: true,
    }
}

fn edge(follower: &str, followee: &str) -> EdgeRecord {
    EdgeRecord {
        follower_id: follower.into(),
        followee_id: followee.into(),
    }
}

#[test]
fn month_parsing_and_arithmetic() {
    let m = ym("2012-12");
    assert_eq!(m.next(), ym("2013-01"));
    assert_eq!(m.to_string(), "2012-12");
    assert!("2013-13".parse::<YearMonth>().is_err());
    assert!("2013".parse::<YearMonth>().is_err());
    let w = window("2012-09", "2013-04");
    assert_eq!(w.len(), 8);
    assert_eq!(w.months().len(), 8);
    assert!(w.contains(ym("2012-09")) && w.contains(ym("2013-04")));
    assert!(!w.contains(ym("2013-05")));
    assert!(MonthRange::new(ym("2013-02"), ym("2013-01")).is_err());
}

#[test]
fn load_small_cohort_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, contents: &str| {
        let mut f = std::fs::File::create(dir.path().join(name)).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
    };
    write(
        "users.jsonl",
        r#"{"user_id":"u1","diagnosed_month":"2013-01","is_seed":true}
{"user_id":"u2","diagnosed_month":null,"is_seed":true}
"#,
    );
    write(
        "tweets.jsonl",
        r#"{"user_id":"u1","timestamp":"2013-01-05T10:00:00Z","text":"got the flu"}
{"user_id":"u1","timestamp":"2013-01-06T11:30:00Z","text":"still in bed"}
{"user_id":"u2","timestamp":"2013-01-07T09:00:00Z","text":"game night"}
{"user_id":"u2","timestamp":"2013-02-01T08:00:00Z","text":"new month"}
{"user_id":"u1","timestamp":"2013-02-11T20:15:00Z","text":"all better"}
"#,
    );
    write("edges.jsonl", "");
    let cohort = load_cohort(&CohortPaths::in_dir(dir.path()), None).unwrap();
    assert_eq!(cohort.users().len(), 2);
    assert_eq!(cohort.tweets().len(), 5);
    assert_eq!(cohort.edges().len(), 0);
    // window inferred from the data
    assert_eq!(cohort.window(), window("2013-01", "2013-02"));
    assert_eq!(cohort.tweets_of("u1", ym("2013-01")).len(), 2);
}

#[test]
fn malformed_lines_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, contents: &str| {
        std::fs::write(dir.path().join(name), contents).unwrap();
    };
    write("users.jsonl", r#"{"user_id":"u1","diagnosed_month":null,"is_seed":true}"#);
    write(
        "tweets.jsonl",
        "{\"user_id\":\"u1\",\"timestamp\":\"2013-01-05T10:00:00Z\",\"text\":\"ok\"}\n{\"user_id\":\"u1\",\"timestamp\":\"Jan 6 2013\",\"text\":\"bad\"}\n",
    );
    write("edges.jsonl", "");
    match load_cohort(&CohortPaths::in_dir(dir.path()), None) {
        Err(Error::Parse { file, line, .. }) => {
            assert!(file.ends_with("tweets.jsonl"));
            assert_eq!(line, 2);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn validation_rejects_bad_structures() {
    let w = window("2013-01", "2013-02");
    // self-edge
    let err = Cohort::new(
        vec![user("u1", None)],
        vec![],
        vec![edge("u1", "u1")],
        vec![],
        w,
    );
    assert!(err.is_err());
    // unknown tweet author
    let err = Cohort::new(
        vec![user("u1", None)],
        vec![tweet("ghost", "2013-01-05T00:00:00Z", "boo")],
        vec![],
        vec![],
        w,
    );
    assert!(err.is_err());
    // tweet outside the window
    let err = Cohort::new(
        vec![user("u1", None)],
        vec![tweet("u1", "2014-01-05T00:00:00Z", "late")],
        vec![],
        vec![],
        w,
    );
    assert!(err.is_err());
    // diagnosis outside the window
    let err = Cohort::new(vec![user("u1", Some("2014-03"))], vec![], vec![], vec![], w);
    assert!(err.is_err());
    // periphery author via an edge is fine
    let ok = Cohort::new(
        vec![user("u1", None)],
        vec![tweet("p1", "2013-01-05T00:00:00Z", "hi")],
        vec![edge("p1", "u1")],
        vec![],
        w,
    );
    assert!(ok.is_ok());
}

#[test]
fn partition_counts_and_zero_tweet_policy() {
    let w = window("2012-11", "2013-04"); // 6 months
    let cohort = Cohort::new(
        vec![user("u1", Some("2013-01"))],
        vec![tweet("u1", "2012-11-10T00:00:00Z", "november post")],
        vec![],
        vec![],
        w,
    )
    .unwrap();
    let months = partition_user_months(&cohort, ZeroTweetSickPolicy::KeepSick);
    assert_eq!(months.len(), 6);
    let sick: Vec<_> = months.iter().filter(|m| m.label.is_sick()).collect();
    assert_eq!(sick.len(), 1);
    assert_eq!(sick[0].month, ym("2013-01"));
    assert!(sick[0].tweet_refs.is_empty());
    // relabeling turns the empty diagnosed month into a control
    let relabeled = partition_user_months(&cohort, ZeroTweetSickPolicy::RelabelControl);
    assert!(relabeled.iter().all(|m| !m.label.is_sick()));
    assert_eq!(relabeled.len(), 6);
}

#[test]
fn network_stream_hand_cases() {
    let w = window("2013-01", "2013-02");
    let cohort = Cohort::new(
        vec![user("u1", None), user("u2", None)],
        vec![
            tweet("f1", "2013-01-05T00:00:00Z", "ab"),
            tweet("f1", "2013-01-06T00:00:00Z", "cd"),
            tweet("f1", "2013-02-01T00:00:00Z", "next month"),
            tweet("u1", "2013-01-07T00:00:00Z", "my own words"),
            tweet("r1", "2013-01-08T00:00:00Z", "xyz"),
        ],
        vec![edge("f1", "u1"), edge("u1", "r1")],
        vec![],
        w,
    )
    .unwrap();
    // u2 has no followers
    let s = assemble_network_stream(&cohort, "u2", ym("2013-01"), Direction::Followers).unwrap();
    assert!(s.tweet_indices.is_empty());
    assert_eq!(s.total_chars, 0);
    // one follower posting "ab" and "cd" in-month
    let s = assemble_network_stream(&cohort, "u1", ym("2013-01"), Direction::Followers).unwrap();
    assert_eq!(s.total_chars, 4);
    assert_eq!(s.texts(&cohort).collect::<Vec<_>>(), vec!["ab", "cd"]);
    // friends side sees r1 only
    let s = assemble_network_stream(&cohort, "u1", ym("2013-01"), Direction::Friends).unwrap();
    assert_eq!(s.texts(&cohort).collect::<Vec<_>>(), vec!["xyz"]);
    assert!(assemble_network_stream(&cohort, "nobody", ym("2013-01"), Direction::Friends).is_err());
}

fn small_config(seed: u64) -> SyntheticConfig {
    SyntheticConfig {
        rng_seed: seed,
        n_seed_users: 20,
        monthly_tweet_mean: 18.0,
        followers_mean: 2.0,
        friends_mean: 2.0,
        periphery_tweet_mean: 5.0,
        window: MonthRange::new(ym("2012-11"), ym("2013-02")).unwrap(),
        ..SyntheticConfig::default()
    }
}

#[test]
fn synthetic_diagnosed_counts_follow_the_fraction() {
    let config = SyntheticConfig {
        n_seed_users: 226,
        followers_mean: 1.0,
        friends_mean: 1.0,
        periphery_tweet_mean: 1.0,
        monthly_tweet_mean: 2.0,
        ..SyntheticConfig::default()
    };
    let cohort = generate_synthetic_cohort(&config).unwrap();
    let diagnosed = cohort
        .users()
        .iter()
        .filter(|u| u.diagnosed_month.is_some())
        .count();
    assert_eq!(diagnosed, 104);
    // the spec'd partition size: 226 users, 8 months
    let months = partition_user_months(&cohort, ZeroTweetSickPolicy::KeepSick);
    assert_eq!(months.len(), 1808);
    let sick = months.iter().filter(|m| m.label.is_sick()).count();
    assert_eq!(sick, 104);

    let none = generate_synthetic_cohort(&SyntheticConfig {
        sick_fraction: 0.0,
        ..small_config(5)
    })
    .unwrap();
    assert!(none.users().iter().all(|u| u.diagnosed_month.is_none()));
}

#[test]
fn synthetic_self_report_fraction() {
    let cohort = generate_synthetic_cohort(&small_config(3)).unwrap();
    let sick_users: Vec<_> = cohort
        .users()
        .iter()
        .filter(|u| u.diagnosed_month.is_some())
        .collect();
    let n_sick = sick_users.len();
    let reporters = sick_users
        .iter()
        .filter(|u| cohort.annotation_count(&u.user_id, u.diagnosed_month.unwrap()) >= 1)
        .count();
    let want = (n_sick as f64 * (17.0 / 35.0)).round() as usize;
    assert_eq!(reporters, want);
    // annotations only reference sick months of reporters
    for a in cohort.annotations() {
        assert!(a.sick_tweet_count >= 1);
        let u = cohort.user(&a.user_id).unwrap();
        assert_eq!(u.diagnosed_month, Some(a.month));
    }
}

#[test]
fn synthetic_generation_is_deterministic_and_round_trips() {
    let config = small_config(11);
    let a = generate_synthetic_cohort(&config).unwrap();
    let b = generate_synthetic_cohort(&config).unwrap();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    write_cohort(&a, dir_a.path()).unwrap();
    write_cohort(&b, dir_b.path()).unwrap();
    for name in ["users.jsonl", "tweets.jsonl", "edges.jsonl", "annotations.jsonl"] {
        let bytes_a = std::fs::read(dir_a.path().join(name)).unwrap();
        let bytes_b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{name} differs between identical seeds");
        assert!(!bytes_a.is_empty());
    }
    // write -> load -> identical content
    let loaded = load_cohort(
        &CohortPaths::in_dir(dir_a.path()),
        Some(config.window),
    )
    .unwrap();
    assert_eq!(loaded.users(), a.users());
    assert_eq!(loaded.tweets(), a.tweets());
    assert_eq!(loaded.edges(), a.edges());
    assert_eq!(loaded.annotations(), a.annotations());
    assert_eq!(loaded.window(), a.window());
}

#[test]
fn network_stream_matches_brute_force_on_synthetic_cohort() {
    let cohort = generate_synthetic_cohort(&small_config(7)).unwrap();
    let month = ym("2013-01");
    for u in cohort.seed_users().take(5) {
        for direction in [Direction::Followers, Direction::Friends] {
            let stream =
                assemble_network_stream(&cohort, &u.user_id, month, direction).unwrap();
            // oracle: scan every tweet, filter by the edge set and month
            let accounts: std::collections::HashSet<&str> = cohort
                .edges()
                .iter()
                .filter_map(|e| match direction {
                    Direction::Followers if e.followee_id == u.user_id => {
                        Some(e.follower_id.as_str())
                    }
                    Direction::Friends if e.follower_id == u.user_id => {
                        Some(e.followee_id.as_str())
                    }
                    _ => None,
                })
                .collect();
            let want: Vec<usize> = cohort
                .tweets()
                .iter()
                .enumerate()
                .filter(|(_, t)| accounts.contains(t.user_id.as_str()) && t.month() == month)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(stream.tweet_indices, want);
            let chars: u64 = want
                .iter()
                .map(|&i| cohort.tweets()[i].text.chars().count() as u64)
                .sum();
            assert_eq!(stream.total_chars, chars);
            // never the user's own tweets
            assert!(stream
                .tweet_indices
                .iter()
                .all(|&i| cohort.tweets()[i].user_id != u.user_id));
        }
    }
}

#[test]
fn annotation_loading_and_validation() {
    let w = window("2013-01", "2013-02");
    let cohort = Cohort::new(
        vec![user("u1", Some("2013-01"))],
        vec![
            tweet("u1", "2013-01-05T00:00:00Z", "a"),
            tweet("u1", "2013-01-06T00:00:00Z", "b"),
        ],
        vec![],
        vec![],
        w,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("annotations.jsonl");

    std::fs::write(&path, "").unwrap();
    assert!(load_annotations(&path, &cohort).unwrap().is_empty());

    std::fs::write(&path, "{\"user_id\":\"u1\",\"month\":\"2013-01\",\"sick_tweet_count\":2}\n")
        .unwrap();
    assert_eq!(load_annotations(&path, &cohort).unwrap().len(), 1);

    // count exceeding the month's tweets
    std::fs::write(&path, "{\"user_id\":\"u1\",\"month\":\"2013-01\",\"sick_tweet_count\":3}\n")
        .unwrap();
    assert!(load_annotations(&path, &cohort).is_err());

    // unknown user
    std::fs::write(&path, "{\"user_id\":\"zz\",\"month\":\"2013-01\",\"sick_tweet_count\":1}\n")
        .unwrap();
    assert!(load_annotations(&path, &cohort).is_err());
}

#[test]
fn sick_months_carry_injected_vocabulary() {
    let cohort = generate_synthetic_cohort(&small_config(19)).unwrap();
    let mut hits = 0;
    let mut sick_users = 0;
    for u in cohort.users().iter().filter(|u| u.diagnosed_month.is_some()) {
        sick_users += 1;
        let month = u.diagnosed_month.unwrap();
        let texts: Vec<&str> = cohort
            .tweets_of(&u.user_id, month)
            .iter()
            .map(|&i| cohort.tweets()[i].text.as_str())
            .collect();
        let vocab_hit = texts
            .iter()
            .any(|t| ["flu", "sick", "fever", "cough", "doctor"].iter().any(|w| t.contains(w)));
        if vocab_hit {
            hits += 1;
        }
    }
    assert!(sick_users > 0);
    // with ~10 tweets a sick month, near-certain per user
    assert!(
        hits as f64 >= 0.8 * sick_users as f64,
        "{hits}/{sick_users} sick months show vocabulary"
    );
}

#[test]
fn label_matches_diagnosed_month_invariant() {
    let cohort = generate_synthetic_cohort(&small_config(23)).unwrap();
    let months = partition_user_months(&cohort, ZeroTweetSickPolicy::KeepSick);
    for um in &months {
        let u = cohort.user(&um.user_id).unwrap();
        assert_eq!(um.label, Label::from_sick(u.diagnosed_month == Some(um.month)));
        for &i in &um.tweet_refs {
            let t = &cohort.tweets()[i];
            assert_eq!(t.user_id, um.user_id);
            assert_eq!(t.month(), um.month);
        }
    }
}
