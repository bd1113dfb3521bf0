use criterion::{criterion_group, criterion_main, Criterion};
use pstep::algorithm::{run_p_step, run_wynn};
use pstep::design::{information_matrix, kw_check};
use pstep::saturated::{solve_saturated_closed_form, solve_saturated_numeric, NumericOptions};
use pstep_bench::{even_design, logit, logit_run, michaelis_menten, poisson};
use std::hint::black_box;

fn saturated(c: &mut Criterion) {
    let mut g = c.benchmark_group("saturated");
    let (lg, mm, po) = (logit(), michaelis_menten(), poisson());
    g.bench_function("logit closed form", |b| {
        b.iter(|| solve_saturated_closed_form(&lg, black_box(&[4.0, 1.0])).unwrap())
    });
    g.bench_function("poisson closed form", |b| {
        b.iter(|| solve_saturated_closed_form(&po, black_box(&[0.0, -1.0, -1.0])).unwrap())
    });
    g.bench_function("michaelis_menten numeric", |b| {
        b.iter(|| {
            solve_saturated_numeric(&mm, black_box(&[2.0, 3.0]), &NumericOptions::default())
                .unwrap()
        })
    });
    g.finish();
}

fn information(c: &mut Criterion) {
    let lg = logit();
    let d = even_design(&lg, 501);
    c.bench_function("information matrix, 501 points", |b| {
        b.iter(|| information_matrix(&d, black_box(&[0.0, 1.0]), &lg).unwrap())
    });
    let sat = solve_saturated_closed_form(&lg, &[0.0, 1.0])
        .unwrap()
        .points
        .to_design();
    c.bench_function("equivalence check, 2001 grid", |b| {
        b.iter(|| kw_check(&sat, black_box(&[0.0, 1.0]), &lg, 2001, 1e-6).unwrap())
    });
}

fn paths(c: &mut Criterion) {
    let mut g = c.benchmark_group("path");
    g.sample_size(10);
    let cfg = logit_run(50);
    g.bench_function("p-step, 50 batches", |b| {
        b.iter(|| run_p_step(black_box(&cfg)).unwrap())
    });
    let cfg = logit_run(100);
    g.bench_function("wynn, 100 steps", |b| {
        b.iter(|| run_wynn(black_box(&cfg)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, saturated, information, paths);
criterion_main!(benches);
