use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twoproc::bitlinalg::{BitVector, MatrixFamily};
use twoproc::extractor::{deor_extract, deor_extract_naive, extract_blocks, ExtractorSpec};
use twoproc::par::ExecMode;

fn random_bytes(len: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..len).map(|_| rng.random()).collect()
}

fn stream_modes(c: &mut Criterion) {
    let rng = &mut ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("stream");
    let specs = [
        ("ip-1024", ExtractorSpec::ip(1024).unwrap(), 4096),
        ("deor-circulant-59x16", ExtractorSpec::deor(MatrixFamily::circulant(59, 16).unwrap()), 16384),
        ("deor-field-64x16", ExtractorSpec::deor(MatrixFamily::field(64, 16).unwrap()), 16384),
    ];
    for (name, spec, blocks) in specs {
        let bytes = (blocks * spec.n()).div_ceil(8);
        let (x, y) = (random_bytes(bytes, rng), random_bytes(bytes, rng));
        group.throughput(Throughput::Bytes(2 * bytes as u64));
        for mode in [ExecMode::Sequential, ExecMode::Parallel] {
            group.bench_with_input(BenchmarkId::new(name, format!("{mode:?}")), &mode, |b, &mode| {
                b.iter(|| extract_blocks(&spec, false, black_box(&x), black_box(&y), blocks, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn deor_paths(c: &mut Criterion) {
    let rng = &mut ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("deor-block");
    for (n, m) in [(59, 16), (101, 64)] {
        let spec = ExtractorSpec::deor(MatrixFamily::circulant(n, m).unwrap());
        let x = BitVector::from_bools((0..n).map(|_| rng.random_bool(0.5)));
        let y = BitVector::from_bools((0..n).map(|_| rng.random_bool(0.5)));
        let id = format!("{n}x{m}");
        group.bench_function(BenchmarkId::new("naive", &id), |b| {
            b.iter(|| deor_extract_naive(&spec, black_box(&x), black_box(&y)).unwrap())
        });
        group.bench_function(BenchmarkId::new("rotation", &id), |b| {
            b.iter(|| deor_extract(&spec, black_box(&x), black_box(&y)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, stream_modes, deor_paths);
criterion_main!(benches);
