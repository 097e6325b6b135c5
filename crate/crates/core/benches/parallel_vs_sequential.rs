use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigUint;

use prc_core::chain::{build_chain, verify_chain, ChainConfig, Selection};
use prc_core::explorer::{explore_tree, ExploreConfig};
use prc_core::primality::{count_primes_in_window, min_prime_in_window, SearchConfig};
use prc_core::{parse_exponent_spec, Execution, GapPolicy, Window};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn search(execution: Execution) -> SearchConfig {
    SearchConfig {
        execution,
        ..SearchConfig::default()
    }
}

fn window_scan(c: &mut Criterion) {
    // p_5 of the factorial chain; its least window prime sits 700 above p_5^6
    let p4 = BigUint::from(127u32).pow(4) + 22u32;
    let p5 = p4.pow(5) + 104u32;
    let w = Window::new(&p5, 6, 1 << 20).unwrap();
    let mut g = c.benchmark_group("min_prime_in_window");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &m| {
            b.iter(|| min_prime_in_window(&w, &search(m)))
        });
    }
    g.finish();
}

fn window_count(c: &mut Criterion) {
    let w = Window::new(&BigUint::from(997u32), 2, 1 << 20).unwrap();
    let mut g = c.benchmark_group("count_primes_in_window");
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &m| {
            b.iter(|| count_primes_in_window(&w, &search(m), false).unwrap())
        });
    }
    g.finish();
}

fn explore(c: &mut Criterion) {
    let exps = parse_exponent_spec("const:3").unwrap();
    let (lo, hi) = (BigUint::from(100u32), BigUint::from(120u32));
    let mut g = c.benchmark_group("explore_tree");
    g.sample_size(10);
    for (name, mode) in MODES {
        let config = ExploreConfig {
            search: search(mode),
            radix: prc_core::RadixConfig {
                execution: mode,
                ..Default::default()
            },
            ..ExploreConfig::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, cfg| {
            b.iter(|| explore_tree(&exps, &lo, &hi, 2, cfg).unwrap())
        });
    }
    g.finish();
}

fn verify(c: &mut Criterion) {
    let exps = parse_exponent_spec("factorial").unwrap();
    let chain = build_chain(&exps, &BigUint::from(2u32), 6, Selection::Min, GapPolicy::RhCms, &ChainConfig::default())
        .unwrap();
    let mut g = c.benchmark_group("verify_chain");
    g.sample_size(10);
    for (name, mode) in MODES {
        let config = ChainConfig {
            search: search(mode),
            ..ChainConfig::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, cfg| {
            b.iter(|| verify_chain(&chain, cfg))
        });
    }
    g.finish();
}

criterion_group!(benches, window_scan, window_count, explore, verify);
criterion_main!(benches);
