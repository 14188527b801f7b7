use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use patronet::game::{
    brute_force_equilibria, check_restrictions, construct_clientelism_equilibrium,
    equilibrium_to_network, verify_spne, GameParams, GridSpec, DEFAULT_MAX_N,
};
use patronet::indices::compute_indices;
use patronet::regression::{client_effect_experiment, SurveyConfig};
use patronet::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn grid() -> Vec<GameParams> {
    let spec = GridSpec {
        n: (5..=30).collect(),
        b: vec![3.0, 4.0, 5.0],
        theta: vec![0.6, 0.7],
        c: vec![1.1],
        r: vec![100.0, 200.0],
        e: vec![0.1],
    };
    spec.points(&GameParams::reference())
        .unwrap()
        .into_iter()
        .filter(|p| check_restrictions(p).all_pass())
        .collect()
}

fn verify_grid(c: &mut Criterion) {
    let points = grid();
    let mut g = c.benchmark_group("verify_grid");
    for (name, exec) in MODES {
        g.bench_function(name, |bench| {
            bench.iter(|| {
                exec.map(&points, |p| {
                    let eq = construct_clientelism_equilibrium(p).unwrap();
                    verify_spne(p, &eq.profile).unwrap().passed()
                })
            })
        });
    }
    g.finish();
}

fn brute_force(c: &mut Criterion) {
    let p = GameParams::new(8, 3.0, 0.7, 1.1, 100.0, 0.1).unwrap();
    let mut g = c.benchmark_group("brute_force_n8");
    for (name, exec) in MODES {
        g.bench_function(name, |bench| {
            bench.iter(|| brute_force_equilibria(black_box(&p), DEFAULT_MAX_N, exec).unwrap())
        });
    }
    g.finish();
}

fn indices(c: &mut Criterion) {
    let nets: Vec<_> = grid()
        .iter()
        .map(|p| {
            let eq = construct_clientelism_equilibrium(p).unwrap();
            equilibrium_to_network(p, &eq.profile)
        })
        .collect();
    let mut g = c.benchmark_group("indices");
    for (name, exec) in MODES {
        g.bench_function(name, |bench| bench.iter(|| compute_indices(black_box(&nets), exec)));
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = SurveyConfig::random(36, 100, 0.15);
    let seeds: Vec<u64> = (0..16).collect();
    let mut g = c.benchmark_group("client_effect_16_seeds");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |bench, &exec| {
            bench.iter(|| client_effect_experiment(&cfg, &seeds, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, verify_grid, brute_force, indices, monte_carlo);
criterion_main!(benches);
