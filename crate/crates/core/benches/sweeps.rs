use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ww_entangle::oracle::{compare_with_closed_form, rank_two_survey, DiscreteModeGrid, GridSpacing};
use ww_entangle::sweep::spec_grid;
use ww_entangle::{build_mode_grid, AxisRange, Execution, Sweeper};

const MODES: [Execution; 2] = [Execution::Parallel, Execution::Sequential];

fn label(exec: Execution) -> &'static str {
    match exec {
        Execution::Parallel => "parallel",
        Execution::Sequential => "sequential",
    }
}

fn oracle(c: &mut Criterion) {
    let grid = DiscreteModeGrid::build(200_000, 1_000.0, 0.0, GridSpacing::default()).unwrap();
    let specs = spec_grid(
        &AxisRange::new(0.05, 10.0, 10).unwrap().values(),
        &AxisRange::new(-10.0, 10.0, 10).unwrap().values(),
    )
    .unwrap();
    let mut group = c.benchmark_group("oracle_check_10x10");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(label(exec)), &exec, |b, &exec| {
            b.iter(|| compare_with_closed_form(black_box(&grid), &specs, exec).unwrap())
        });
    }
    group.finish();
}

fn fidelity(c: &mut Criterion) {
    let eps = AxisRange::new(0.0, 10.0, 101).unwrap();
    let delta = AxisRange::new(-10.0, 10.0, 201).unwrap();
    let mut group = c.benchmark_group("fidelity_grid_101x201");
    for exec in MODES {
        let sweeper = Sweeper::new(exec);
        group.bench_function(BenchmarkId::from_parameter(label(exec)), |b| {
            b.iter(|| sweeper.grid_fidelity(black_box(eps), delta).unwrap())
        });
    }
    group.finish();
}

fn rank_two(c: &mut Criterion) {
    let grid = build_mode_grid(10, 5.0, 0.0).unwrap();
    let mut group = c.benchmark_group("rank_two_survey_n10");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(label(exec)), &exec, |b, &exec| {
            b.iter(|| rank_two_survey(black_box(&grid), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, oracle, fidelity, rank_two);
criterion_main!(benches);
