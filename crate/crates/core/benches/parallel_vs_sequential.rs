// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use commenergy::corpus::parse_corpus;
use commenergy::energy::{community_energy, EnergyFunction, EnergyModel};
use commenergy::graph::build_graph;
use commenergy::predictor::{train, PredictorKind, TrainConfig};
use commenergy::sentiment::{community_vectors, vectors_for_topic, Normalization};
use commenergy::synth::{generate, Planted, SynthConfig};
use commenergy::topics::Topic;
use commenergy::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn world() -> commenergy::synth::SynthWorld {
    generate(&SynthConfig {
        seed: 7,
        n_users: 800,
        edge_density: 0.01,
        n_topics: 30,
        phrase_coverage: 0.7,
        planted: Planted::Linear {
            alpha: 2.0,
            beta: 50.0,
            noise: 0.05,
        },
        ..Default::default()
    })
    .expect("bench config is feasible")
}

fn topics_of(world: &commenergy::synth::SynthWorld) -> Vec<Topic> {
    world
        .expected
        .topics
        .iter()
        .map(|t| Topic {
            hashtag: t.hashtag.clone(),
            start_time: world.expected.window.test_start,
            popularity: t.popularity,
            key_phrases: t.key_phrases.clone(),
        })
        .collect()
}

fn bench_ingest(c: &mut Criterion) {
    let world = world();
    let text = world.corpus_text();
    let mut group = c.benchmark_group("parse_corpus");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| parse_corpus(black_box(&text), &world.lexicon, exec).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("build_graph");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_graph(black_box(&world.tweets), exec))
        });
    }
    group.finish();
}

fn bench_sentiment_and_energy(c: &mut Criterion) {
    let world = world();
    let topics = topics_of(&world);
    let mut group = c.benchmark_group("community_vectors");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                community_vectors(
                    &topics,
                    &world.community,
                    black_box(&world.tweets),
                    Normalization::AllTweets,
                    exec,
                )
            })
        });
    }
    group.finish();

    let vectors = community_vectors(
        &topics,
        &world.community,
        &world.tweets,
        Normalization::AllTweets,
        Exec::Parallel,
    );
    let mut group = c.benchmark_group("community_energy");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                for topic in &topics {
                    let vs = vectors_for_topic(&vectors, &topic.hashtag);
                    for model in EnergyModel::ALL {
                        for function in EnergyFunction::ALL {
                            black_box(
                                community_energy(
                                    &topic.hashtag,
                                    &world.community,
                                    &vs,
                                    world.expected.m,
                                    model,
                                    function,
                                    exec,
                                )
                                .unwrap(),
                            );
                        }
                    }
                }
            })
        });
    }
    group.finish();
}

fn bench_edge_training(c: &mut Criterion) {
    let world = world();
    let samples = world.samples();
    let edges = world.edge_names();
    let mut group = c.benchmark_group("train_edge_full_batch");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = TrainConfig {
            batch_size: 0,
            epochs: 50,
            early_stop: None,
            exec,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| train(PredictorKind::Edge, &edges, black_box(&samples), &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_ingest, bench_sentiment_and_energy, bench_edge_training);
criterion_main!(benches);
