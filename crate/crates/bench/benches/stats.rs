use criterion::{black_box, criterion_group, criterion_main, Criterion};

use fluscope_core::stats::{anova, fisher_exact, ks_two_sample, ContingencyTable2x2, Factor};

fn bench_stats(c: &mut Criterion) {
    c.bench_function("fisher_exact_total_40", |b| {
        let t = ContingencyTable2x2::new(12, 8, 9, 11);
        b.iter(|| black_box(fisher_exact(black_box(&t)).unwrap()))
    });
    c.bench_function("fisher_exact_total_1808", |b| {
        let t = ContingencyTable2x2::new(60, 44, 820, 884);
        b.iter(|| black_box(fisher_exact(black_box(&t)).unwrap()))
    });

    let x: Vec<f64> = (0..200).map(|i| (i as f64 * 0.71).sin()).collect();
    let y: Vec<f64> = (0..150).map(|i| (i as f64 * 0.37).cos() + 0.1).collect();
    c.bench_function("ks_two_sample_200_150", |b| {
        b.iter(|| black_box(ks_two_sample(black_box(&x), black_box(&y)).unwrap()))
    });

    let n = 80;
    let response: Vec<f64> = (0..n).map(|i| (i % 7) as f64 + (i % 3) as f64 * 0.5).collect();
    let f1 = Factor::new(
        "a",
        (0..n).map(|i| format!("l{}", i % 2)).collect::<Vec<_>>(),
    );
    let f2 = Factor::new(
        "b",
        (0..n).map(|i| format!("l{}", i % 4)).collect::<Vec<_>>(),
    );
    c.bench_function("anova_80x2", |b| {
        b.iter(|| black_box(anova(black_box(&response), black_box(&[f1.clone(), f2.clone()]))))
    });
}

criterion_group!(benches, bench_stats);
criterion_main!(benches);
