use criterion::{black_box, criterion_group, criterion_main, Criterion};

use fluscope_core::corpus::{generate_synthetic_cohort, MonthRange, SyntheticConfig};
use fluscope_core::eval::auc_pairwise;
use fluscope_core::features::{Dataset, FeatureVector, Label};
use fluscope_core::learners::{train, AlgorithmKind, AlgorithmSpec};

fn small_config() -> SyntheticConfig {
    SyntheticConfig {
        rng_seed: 5,
        n_seed_users: 20,
        monthly_tweet_mean: 20.0,
        followers_mean: 2.0,
        friends_mean: 2.0,
        periphery_tweet_mean: 5.0,
        window: MonthRange::new("2012-11".parse().unwrap(), "2013-02".parse().unwrap())
            .unwrap(),
        ..SyntheticConfig::default()
    }
}

fn training_data(n: usize) -> Dataset {
    let mut data = Dataset::new("bench");
    for i in 0..n {
        let sick = i % 2 == 0;
        let x0 = if sick { 1.0 } else { -1.0 } * (1.0 + (i % 13) as f64 * 0.1);
        let x1 = ((i * 7) % 10) as f64 / 10.0;
        let x2 = ((i * 3) % 5) as f64;
        data.push(
            FeatureVector {
                schema_id: "bench".into(),
                values: vec![x0, x1, x2],
            },
            Label::from_sick(sick),
            format!("i{i}"),
        )
        .unwrap();
    }
    data
}

fn bench_pipeline(c: &mut Criterion) {
    c.bench_function("generate_synthetic_cohort_20_users", |b| {
        let config = small_config();
        b.iter(|| black_box(generate_synthetic_cohort(black_box(&config)).unwrap()))
    });

    let data = training_data(200);
    for kind in [
        AlgorithmKind::NaiveBayes,
        AlgorithmKind::DecisionTree,
        AlgorithmKind::AdaBoost,
    ] {
        c.bench_function(&format!("train_{}_200x3", kind.name()), |b| {
            let spec = AlgorithmSpec::new(kind).with_seed(3);
            b.iter(|| black_box(train(black_box(&spec), black_box(&data)).unwrap()))
        });
    }

    let scores: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
    let labels: Vec<Label> = (0..500).map(|i| Label::from_sick(i % 5 == 0)).collect();
    c.bench_function("auc_pairwise_500", |b| {
        b.iter(|| black_box(auc_pairwise(black_box(&scores), black_box(&labels)).unwrap()))
    });
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
