//! Sequential vs rayon for the data-parallel hot paths.
//!
//! `cargo bench -p signtrack-core` compares both modes; with
//! `--no-default-features` the parallel rows fall back to sequential.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use signtrack::chunker::{build_chunk_records, coverage_histogram, sample_clips, ChunkRecord, SamplerConfig};
use signtrack::grammar::{synthesize_examples, ExampleRenderer, MixtureWeights};
use signtrack::metrics::{corpus_timed_bleu, BleuConfig};
use signtrack::par::Execution;
use signtrack::synth::{jitter_track, synthetic_track, SynthConfig};
use signtrack::CaptionTrack;

const MODES: [(&str, Execution); 2] = [("seq", Execution::Sequential), ("par", Execution::Parallel)];

fn corpus(n_videos: usize, duration: f64, cfg: &SamplerConfig) -> Vec<ChunkRecord> {
    (0..n_videos)
        .flat_map(|i| {
            let track = synthetic_track(duration, i as u64, &SynthConfig::default());
            build_chunk_records(&format!("v{i}"), &track, None, cfg).unwrap()
        })
        .collect()
}

fn sampling(c: &mut Criterion) {
    let cfg = SamplerConfig::with_seed(1);
    let records = corpus(1, 340.0, &cfg);
    let mut g = c.benchmark_group("sample_clips_100k");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sample_clips(&records, &cfg, 100_000, exec))
        });
    }
    g.finish();

    let clips = sample_clips(&records, &cfg, 100_000, Execution::default());
    let mut g = c.benchmark_group("coverage_histogram_100k");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| coverage_histogram(&records, &clips, 340.0, exec))
        });
    }
    g.finish();
}

fn examples(c: &mut Criterion) {
    let cfg = SamplerConfig::with_seed(2);
    let records = corpus(8, 300.0, &cfg);
    let renderer = ExampleRenderer::default();
    let weights = MixtureWeights::default();
    let mut g = c.benchmark_group("synthesize_examples_5k");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| synthesize_examples(&records, &cfg, &weights, &renderer, 5_000, exec))
        });
    }
    g.finish();
}

fn timed_bleu(c: &mut Criterion) {
    let refs: Vec<CaptionTrack> = (0..64).map(|i| synthetic_track(600.0, i, &SynthConfig::default())).collect();
    let hyps: Vec<CaptionTrack> = refs.iter().enumerate().map(|(i, r)| jitter_track(r, 1.0, 3, i as u64)).collect();
    let pairs: Vec<_> = hyps.iter().zip(&refs).collect();
    let bleu = BleuConfig::default();
    let mut g = c.benchmark_group("corpus_timed_bleu_64x600s");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| corpus_timed_bleu(&pairs, &bleu, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, sampling, examples, timed_bleu);
criterion_main!(benches);
