//! Sequential vs parallel execution on the hot paths. Build with
//! `--no-default-features` to measure the fallback alone.

use std::collections::HashMap;
use std::hint::black_box;

use adjprobe_core::denotation::{
    exhaustive_intersectivity, run_simulation, CategoryMix, SimulationConfig,
};
use adjprobe_core::embed::{EmbeddingProvider, ToyEmbedder};
use adjprobe_core::phrasegen::{generate_pair_quadruples, generate_phrases, phrase_texts_needed};
use adjprobe_core::relations::{evaluate_intersectivity, evaluate_pair_intersectivity};
use adjprobe_core::{EmbeddingVector, Execution, Lexicon};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn label(mode: Execution) -> &'static str {
    match mode {
        Execution::Sequential => "sequential",
        Execution::Parallel => "parallel",
    }
}

fn corpus(c: &mut Criterion) {
    let lex = Lexicon::bundled();
    let phrases = generate_phrases(&lex, 2);
    let quads: Vec<_> = generate_pair_quadruples(&lex).collect();
    let texts = phrase_texts_needed(&phrases, quads.iter().copied());
    let toy = ToyEmbedder::new(0, 64).unwrap();
    let vectors: HashMap<String, EmbeddingVector> = texts
        .iter()
        .cloned()
        .zip(toy.embed(&texts).unwrap())
        .collect();

    let mut group = c.benchmark_group("corpus");
    group.sample_size(10);
    for mode in MODES {
        group.bench_with_input(
            BenchmarkId::new("toy_embed", label(mode)),
            &mode,
            |b, &mode| {
                let toy = ToyEmbedder::new(0, 64).unwrap().with_execution(mode);
                b.iter(|| black_box(toy.embed(&texts).unwrap()))
            },
        );
        group.bench_with_input(
            BenchmarkId::new("intersectivity", label(mode)),
            &mode,
            |b, &mode| {
                b.iter(|| black_box(evaluate_intersectivity(&phrases, &vectors, mode).unwrap()))
            },
        );
        group.bench_with_input(
            BenchmarkId::new("pair_intersectivity", label(mode)),
            &mode,
            |b, &mode| {
                b.iter(|| black_box(evaluate_pair_intersectivity(&quads, &vectors, mode).unwrap()))
            },
        );
    }
    group.finish();
}

fn set_world(c: &mut Criterion) {
    let mut group = c.benchmark_group("set_world");
    group.sample_size(10);
    for mode in MODES {
        group.bench_with_input(
            BenchmarkId::new("simulation_10k", label(mode)),
            &mode,
            |b, &mode| {
                let mut config = SimulationConfig::new(7, 64, 10_000, CategoryMix::default());
                config.execution = mode;
                b.iter(|| black_box(run_simulation(&config).unwrap()))
            },
        );
        group.bench_with_input(
            BenchmarkId::new("exhaustive_8", label(mode)),
            &mode,
            |b, &mode| b.iter(|| black_box(exhaustive_intersectivity(8, mode))),
        );
    }
    group.finish();
}

criterion_group!(benches, corpus, set_world);
criterion_main!(benches);
