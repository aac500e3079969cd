use std::hint::black_box;

use chaoslab_core::bohr::{certify_bohr, check_certificate, default_input_sft, default_input_toral, SignSequenceSpec};
use chaoslab_core::chain::{build_transition_graph, chain_components, tarjan_scc};
use chaoslab_core::horseshoe::{build_coding_map, default_horseshoe_input_sft, DEFAULT_CODING_BUDGET};
use chaoslab_core::symbolic::shadow_sft;
use chaoslab_core::toral::shadow_toral_float;
use chaoslab_core::{SftSystem, ToralMap};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shadowing(c: &mut Criterion) {
    let cat = ToralMap::cat();
    let mut g = c.benchmark_group("shadow");
    for len in [100usize, 1000, 10_000] {
        let po = cat.random_pseudo_orbit(&mut ChaCha8Rng::seed_from_u64(1), len, 1e-6).unwrap();
        g.bench_with_input(BenchmarkId::new("cat_float", len), &po, |b, po| {
            b.iter(|| shadow_toral_float(&cat, black_box(po)).unwrap())
        });
    }
    let gm = SftSystem::golden_mean();
    for len in [100usize, 1000] {
        let po = gm.random_pseudo_orbit(&mut ChaCha8Rng::seed_from_u64(1), len, 1.0 / 16.0).unwrap();
        g.bench_with_input(BenchmarkId::new("golden_mean", len), &po, |b, po| {
            b.iter(|| shadow_sft(&gm, black_box(po), 1.0 / 16.0).unwrap())
        });
    }
    g.finish();
}

fn graphs(c: &mut Criterion) {
    let cat = ToralMap::cat();
    let mut g = c.benchmark_group("chain");
    for n in [32usize, 128] {
        g.bench_with_input(BenchmarkId::new("cat_graph", n), &n, |b, &n| {
            b.iter(|| build_transition_graph(&cat, 1.0 / n as f64, 1e-3).unwrap())
        });
        let graph = build_transition_graph(&cat, 1.0 / n as f64, 1e-3).unwrap();
        g.bench_with_input(BenchmarkId::new("scc", graph.num_boxes()), &graph, |b, graph| {
            b.iter(|| tarjan_scc(black_box(&graph.adjacency)))
        });
        g.bench_with_input(BenchmarkId::new("components", graph.num_boxes()), &graph, |b, graph| {
            b.iter(|| chain_components(black_box(graph)))
        });
    }
    g.finish();
}

fn certificates(c: &mut Criterion) {
    let mut g = c.benchmark_group("bohr");
    g.sample_size(10);
    let sys = SftSystem::full_shift(2);
    let input = default_input_sft(&sys, SignSequenceSpec::bernoulli(0.5, 7).unwrap(), 10_000).unwrap();
    g.bench_function("certify_fullshift_1e4", |b| b.iter(|| certify_bohr(&sys, black_box(&input)).unwrap()));
    let cert = certify_bohr(&sys, &input).unwrap();
    g.bench_function("check_fullshift_1e4", |b| b.iter(|| check_certificate(&sys, black_box(&cert))));
    let cat = ToralMap::cat();
    let input = default_input_toral(&cat, SignSequenceSpec::bernoulli(0.5, 7).unwrap(), 1000).unwrap();
    g.bench_function("certify_cat_1e3", |b| b.iter(|| certify_bohr(&cat, black_box(&input)).unwrap()));
    let gm = SftSystem::golden_mean();
    let hs = default_horseshoe_input_sft(&gm).unwrap();
    g.bench_function("coding_map_golden_mean_w4", |b| {
        b.iter(|| build_coding_map(&gm, black_box(&hs), 4, DEFAULT_CODING_BUDGET).unwrap())
    });
    g.finish();
}

criterion_group!(benches, shadowing, graphs, certificates);
criterion_main!(benches);
