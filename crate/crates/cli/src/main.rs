//! fluscope: month-level illness detection from timeline data.

mod config;
mod output;
mod pipeline;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use fluscope_core::collector::{
    simulate, EndpointLimit, SimulationConfig, ENDPOINTS,
};
use fluscope_core::corpus::{read_tweets, write_cohort};
use fluscope_core::features::{
    build_vocabulary, information_gain, top_predictive_keywords, KeywordSet,
};
use fluscope_core::stats::{anova, fisher_exact, ks_two_sample, odds_ratio, ContingencyTable2x2,
    Factor};
use fluscope_core::textprep::{preprocess, Stoplist};

use crate::config::ExperimentConfig;
use crate::output::{fmt6, write_csv, write_text, write_tsv};

#[derive(Parser)]
#[command(
    name = "fluscope",
    version,
    about = "Diagnose user-months from timeline data: five base signals and a stacked meta-classifier"
)]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true, env = "FLUSCOPE_CONFIG")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config file.
    #[arg(long, global = true, env = "FLUSCOPE_SEED")]
    seed: Option<u64>,

    /// Artifact directory; overrides the config file.
    #[arg(long, global = true, env = "FLUSCOPE_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads (0 = automatic).
    #[arg(long, global = true, env = "FLUSCOPE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort and write its JSONL files.
    Generate {
        /// Number of seed users; overrides the config.
        #[arg(long)]
        users: Option<usize>,
    },
    /// Normalize a tweets.jsonl file into stem lists.
    Preprocess {
        #[arg(long)]
        tweets: PathBuf,
        /// Stop-word list; the vendored list when absent.
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keyword-set exports.
    Keywords {
        #[command(subcommand)]
        command: KeywordsCommand,
    },
    /// Compute the five per-user-month base signals.
    Signals,
    /// Posting-rate anomaly scores and threshold fit.
    Anomaly,
    /// Meta-classifier experiments.
    Meta {
        #[command(subcommand)]
        command: MetaCommand,
    },
    /// Statistical tests on external data.
    Stats {
        #[command(subcommand)]
        command: StatsCommand,
    },
    /// Collection-policy simulation.
    Collect {
        #[command(subcommand)]
        command: CollectCommand,
    },
    /// Produce every table and ROC artifact for the configured experiment.
    Report,
}

#[derive(Subcommand)]
enum KeywordsCommand {
    /// Write expert, mined and top-ratio keyword tables as CSV.
    Export,
}

#[derive(Subcommand)]
enum MetaCommand {
    /// Evaluate the meta-classifiers and write the performance table.
    Run,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Two-sided exact test on a 2x2 table.
    Fisher { a: u64, b: u64, c: u64, d: u64 },
    /// Two-sample Kolmogorov-Smirnov test; one number per line per file.
    Ks {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
    /// Sequential ANOVA on a CSV (first column the response, remaining
    /// columns categorical factors, header row named).
    Anova {
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Subcommand)]
enum CollectCommand {
    /// Simulate the rate-limited scheduler against the configured cohort.
    Simulate {
        #[arg(long, default_value_t = 30)]
        days: u64,
        #[arg(long, default_value_t = 60)]
        step: u64,
        /// Queries per window, applied to every endpoint.
        #[arg(long, default_value_t = 15)]
        capacity: u32,
        /// Window length in seconds.
        #[arg(long, default_value_t = 900)]
        window: u64,
        #[arg(long, default_value_t = 3000)]
        fetch_ceiling: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(out_dir) = &cli.out_dir {
        config.out_dir = Some(out_dir.clone());
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    config.check_seed()?;
    Ok(config)
}

fn out_dir(config: &ExperimentConfig) -> PathBuf {
    config
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("fluscope_out"))
}

fn run(cli: Cli) -> Result<()> {
    let config = resolve_config(&cli)?;
    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()
            .ok();
    }
    match &cli.command {
        Command::Generate { users } => cmd_generate(&config, *users),
        Command::Preprocess {
            tweets,
            stopwords,
            out,
        } => cmd_preprocess(tweets, stopwords.as_deref(), out),
        Command::Keywords {
            command: KeywordsCommand::Export,
        } => cmd_keywords_export(&config),
        Command::Signals => cmd_signals(&config),
        Command::Anomaly => cmd_anomaly(&config),
        Command::Meta {
            command: MetaCommand::Run,
        } => cmd_meta_run(&config),
        Command::Stats { command } => cmd_stats(command),
        Command::Collect {
            command:
                CollectCommand::Simulate {
                    days,
                    step,
                    capacity,
                    window,
                    fetch_ceiling,
                },
        } => cmd_collect_simulate(&config, *days, *step, *capacity, *window, *fetch_ceiling),
        Command::Report => {
            let dir = out_dir(&config);
            let cohort = config.resolve_cohort()?;
            pipeline::run_report(&cohort, &config, &dir)?;
            println!("report written to {}", dir.display());
            Ok(())
        }
    }
}

fn cmd_generate(config: &ExperimentConfig, users: Option<usize>) -> Result<()> {
    let mut synthetic = config.synthetic_config();
    if let Some(n) = users {
        synthetic.n_seed_users = n;
    }
    let cohort = fluscope_core::corpus::generate_synthetic_cohort(&synthetic)?;
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)?;
    write_cohort(&cohort, &dir)?;
    let mut resolved = config.clone();
    resolved.data.synthetic = synthetic;
    write_text(&dir.join("resolved_config.toml"), &toml::to_string_pretty(&resolved)?)?;
    println!(
        "generated {} users, {} tweets, {} edges, {} annotations in {}",
        cohort.users().len(),
        cohort.tweets().len(),
        cohort.edges().len(),
        cohort.annotations().len(),
        dir.display()
    );
    Ok(())
}

fn cmd_preprocess(tweets: &Path, stopwords: Option<&Path>, out: &Path) -> Result<()> {
    let stoplist = match stopwords {
        Some(p) => Stoplist::from_file(p)?,
        None => Stoplist::vendored(),
    };
    let records = read_tweets(tweets)?;
    let file = std::fs::File::create(out)
        .with_context(|| format!("creating {}", out.display()))?;
    let mut w = std::io::BufWriter::new(file);
    for t in &records {
        let doc = preprocess(&t.text, &stoplist);
        writeln!(
            w,
            "{}",
            serde_json::json!({
                "user_id": t.user_id,
                "timestamp": t.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                "stems": doc.stems,
                "chars": doc.source_char_count,
            })
        )?;
    }
    w.flush()?;
    println!("preprocessed {} tweets into {}", records.len(), out.display());
    Ok(())
}

fn cmd_keywords_export(config: &ExperimentConfig) -> Result<()> {
    let cohort = config.resolve_cohort()?;
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)?;
    let stemmed = pipeline::stem_cohort(&cohort, config)?;

    // expert set with total occurrence counts
    let expert = KeywordSet::expert();
    let rows: Vec<Vec<String>> = expert
        .keywords
        .iter()
        .map(|k| {
            let count: u64 = stemmed
                .own_docs
                .iter()
                .flat_map(|docs| docs.iter())
                .flat_map(|d| d.stems.iter())
                .filter(|s| *s == k)
                .count() as u64;
            vec![k.clone(), count.to_string()]
        })
        .collect();
    write_csv(&dir.join("expert_keywords.csv"), &["stem", "occurrences"], &rows)?;

    // mined sets ranked by information gain, with scores
    let signal_config = config.signal_config()?;
    let vocab = build_vocabulary(
        stemmed.own_docs.iter().flat_map(|d| d.iter()),
        signal_config.vocabulary_cap,
    );
    let sets: Vec<std::collections::HashSet<&str>> = stemmed
        .own_docs
        .iter()
        .map(|docs| {
            docs.iter()
                .flat_map(|d| d.stems.iter().map(String::as_str))
                .collect()
        })
        .collect();
    let mut scored: Vec<(String, f64)> = Vec::with_capacity(vocab.len());
    for word in &vocab {
        let presence: Vec<bool> = sets.iter().map(|s| s.contains(word.as_str())).collect();
        scored.push((word.clone(), information_gain(&presence, &stemmed.labels)?));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for &k in &config.signals.mined_k {
        let rows: Vec<Vec<String>> = scored
            .iter()
            .take(k)
            .map(|(w, ig)| vec![w.clone(), fmt6(*ig)])
            .collect();
        write_csv(
            &dir.join(format!("mined_keywords_k{k}.csv")),
            &["stem", "information_gain"],
            &rows,
        )?;
    }

    // positive-predictive ratios
    let ratios = top_predictive_keywords(&stemmed.own_docs, &stemmed.labels, 30)?;
    write_csv(
        &dir.join("top_keywords.csv"),
        &["stem", "ratio"],
        &ratios
            .iter()
            .map(|r| vec![r.keyword.clone(), format!("{:.3}", r.ratio)])
            .collect::<Vec<_>>(),
    )?;
    println!("keyword tables written to {}", dir.display());
    Ok(())
}

fn cmd_signals(config: &ExperimentConfig) -> Result<()> {
    let cohort = config.resolve_cohort()?;
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)?;
    write_text(&dir.join("resolved_config.toml"), &config.resolved_toml()?)?;
    let signals = fluscope_core::meta::compute_base_signals(&cohort, &config.signal_config()?)?;
    pipeline::write_signal_artifacts(&dir, &signals)?;
    println!(
        "signals for {} instances written to {}",
        signals.instance_ids.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_anomaly(config: &ExperimentConfig) -> Result<()> {
    let cohort = config.resolve_cohort()?;
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)?;
    let stemmed = pipeline::stem_cohort(&cohort, config)?;
    let art = pipeline::anomaly_artifacts(&cohort, &stemmed)?;
    write_csv(
        &dir.join("anomaly_scores.csv"),
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
    println!(
        "threshold {} (full-set F1 {}), {} scored instances, AUC {}",
        fmt6(art.threshold),
        fmt6(art.full_f1),
        art.rows.len(),
        fmt6(art.auc)
    );
    Ok(())
}

fn cmd_meta_run(config: &ExperimentConfig) -> Result<()> {
    let cohort = config.resolve_cohort()?;
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)?;
    write_text(&dir.join("resolved_config.toml"), &config.resolved_toml()?)?;
    let signals = fluscope_core::meta::compute_base_signals(&cohort, &config.signal_config()?)?;
    let meta = pipeline::run_meta(&signals, config)?;
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
        &dir.join("meta_performance.tsv"),
        &["classifier", "auc", "accuracy"],
        &rows,
    )?;
    for row in &rows {
        println!("{}", row.join("\t"));
    }
    Ok(())
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let contents = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<f64>().with_context(|| format!("bad number `{l}`")))
        .collect()
}

fn cmd_stats(command: &StatsCommand) -> Result<()> {
    match command {
        StatsCommand::Fisher { a, b, c, d } => {
            let table = ContingencyTable2x2::new(*a, *b, *c, *d);
            let result = fisher_exact(&table)?;
            println!("test\tstatistic\tp_value");
            println!(
                "fisher_exact\t{}\t{}",
                fmt6(result.statistic),
                fmt6(result.p_value)
            );
            println!("odds_ratio\t{}\t", fmt6(odds_ratio(&table)));
        }
        StatsCommand::Ks { x, y } => {
            let xs = read_numbers(x)?;
            let ys = read_numbers(y)?;
            let result = ks_two_sample(&xs, &ys)?;
            println!("test\tstatistic\tp_value");
            println!(
                "ks_two_sample\t{}\t{}",
                fmt6(result.statistic),
                fmt6(result.p_value)
            );
        }
        StatsCommand::Anova { data } => {
            let contents = std::fs::read_to_string(data)
                .with_context(|| format!("reading {}", data.display()))?;
            let mut lines = contents.lines().filter(|l| !l.trim().is_empty());
            let header: Vec<&str> = lines
                .next()
                .context("empty ANOVA input")?
                .split(',')
                .collect();
            if header.len() < 2 {
                bail!("ANOVA input needs a response column and at least one factor");
            }
            let mut y = Vec::new();
            let mut columns: Vec<Vec<String>> = vec![Vec::new(); header.len() - 1];
            for line in lines {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != header.len() {
                    bail!("row `{line}` does not match the header");
                }
                y.push(fields[0].trim().parse::<f64>()?);
                for (col, field) in columns.iter_mut().zip(&fields[1..]) {
                    col.push(field.trim().to_string());
                }
            }
            let factors: Vec<Factor> = header[1..]
                .iter()
                .zip(columns)
                .map(|(name, levels)| Factor::new(*name, levels))
                .collect();
            let table = anova(&y, &factors)?;
            println!("factor\tdf\tsum_sq\tf_value\tp_value");
            for row in &table.rows {
                println!(
                    "{}\t{}\t{}\t{}\t{:.6e}",
                    row.factor,
                    row.df,
                    fmt6(row.sum_sq),
                    fmt6(row.f_value),
                    row.p_value
                );
            }
            println!(
                "residuals\t{}\t{}\t\t",
                table.residual_df,
                fmt6(table.residual_sum_sq)
            );
        }
    }
    Ok(())
}

fn cmd_collect_simulate(
    config: &ExperimentConfig,
    days: u64,
    step: u64,
    capacity: u32,
    window: u64,
    fetch_ceiling: usize,
) -> Result<()> {
    let cohort = config.resolve_cohort()?;
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)?;
    let limits: Vec<EndpointLimit> = ENDPOINTS
        .iter()
        .map(|&e| EndpointLimit::new(e, capacity, window))
        .collect::<fluscope_core::Result<_>>()?;
    let sim = SimulationConfig {
        days,
        step_secs: step,
        fetch_ceiling,
    };
    let fetched_path = dir.join("fetched_tweets.jsonl");
    let fetched_file = std::fs::File::create(&fetched_path)?;
    let mut fetched_writer = std::io::BufWriter::new(fetched_file);
    let tweets = cohort.tweets();
    let mut fetched_count = 0u64;
    let (trace, report) = simulate(&cohort, &sim, &limits, |tweet_idx| {
        let t = &tweets[tweet_idx];
        let line = serde_json::json!({
            "user_id": t.user_id,
            "timestamp": t.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "text": t.text,
        });
        let _ = writeln!(fetched_writer, "{line}");
        fetched_count += 1;
    })?;
    fetched_writer.flush()?;

    let trace_path = dir.join("trace.jsonl");
    let trace_file = std::fs::File::create(&trace_path)?;
    let mut w = std::io::BufWriter::new(trace_file);
    for ev in &trace {
        writeln!(w, "{}", serde_json::to_string(ev)?)?;
    }
    w.flush()?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (account, cov) in &report.per_account {
        let mut per_endpoint: BTreeMap<&str, u32> = BTreeMap::new();
        for (e, n) in &cov.queries {
            per_endpoint.insert(e.name(), *n);
        }
        rows.push(vec![
            account.clone(),
            per_endpoint.get("tweets").copied().unwrap_or(0).to_string(),
            per_endpoint.get("profile").copied().unwrap_or(0).to_string(),
            per_endpoint.get("followers").copied().unwrap_or(0).to_string(),
            cov.fetched_tweets.to_string(),
            cov.max_tweet_staleness.to_string(),
        ]);
    }
    write_tsv(
        &dir.join("coverage.tsv"),
        &[
            "account",
            "tweet_queries",
            "profile_queries",
            "follower_queries",
            "fetched_tweets",
            "max_tweet_staleness_secs",
        ],
        &rows,
    )?;
    println!(
        "simulated {days} days: {} trace events, {fetched_count} tweets fetched",
        trace.len()
    );
    println!(
        "violations: rate_limit={} requery={} priority={}",
        report.rate_limit_violations, report.requery_violations, report.priority_violations
    );
    Ok(())
}
