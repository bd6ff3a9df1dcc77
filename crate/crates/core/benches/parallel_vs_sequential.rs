use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ddab_core::adversary::{RandomParams, RandomWalk};
use ddab_core::amount::int;
use ddab_core::corpus::{demo_environment, desk_corpus};
use ddab_core::engine::{run_parallel_subgames, GameConfig};
use ddab_core::par::Exec;
use ddab_core::policy::required_assets;
use ddab_core::verifier::{verify_sufficiency, Reentry, SufficiencyOptions};
use std::sync::Arc;

fn corpus_sufficiency(c: &mut Criterion) {
    let corpus = desk_corpus(2024);
    let mut group = c.benchmark_group("corpus_sufficiency");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Auto)] {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let verdicts = exec.map(&corpus, |e| {
                    let x = required_assets(e.env.path().len(), e.k, &int(1)).unwrap();
                    let opts = SufficiencyOptions {
                        reentry: Reentry::Concrete,
                        ..Default::default()
                    };
                    verify_sufficiency(&e.env, e.k, &x, opts).unwrap().verdict
                });
                black_box(verdicts)
            })
        });
    }
    group.finish();
}

fn fractional_rollouts(c: &mut Criterion) {
    let env = Arc::new(demo_environment());
    let x = required_assets(23, 1, &int(1)).unwrap();
    let start = env.graph().id("b3").unwrap();
    let seeds: Vec<u64> = (0..64).collect();
    let mut group = c.benchmark_group("fractional_rollouts");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Auto)] {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let results = exec.map(&seeds, |&seed| {
                    let mut p = RandomParams::new(seed);
                    p.split_probability = 0.2;
                    let mut a = RandomWalk::new(p);
                    let mut cfg = GameConfig::new(env.clone(), 1, x.clone(), int(1), start);
                    cfg.max_steps = 60;
                    run_parallel_subgames(cfg, &mut a).unwrap().result
                });
                black_box(results)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, corpus_sufficiency, fractional_rollouts);
criterion_main!(benches);
