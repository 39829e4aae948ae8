use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selectis::optimal_embed::{count_orbits, enumerate_embeddings};
use selectis::selectivity::random_instance;
use selectis::{decide_selectivity, LocalEmbedding, LocalMatrix, LocalRing, OrderPresentation, SizeGuards};

fn random_matrix(rng: &mut ChaCha8Rng, ring: LocalRing, n: usize) -> LocalMatrix {
    let entries = (0..n * n).map(|_| rng.gen_range(0..ring.modulus())).collect();
    LocalMatrix::new(ring, n, entries).unwrap()
}

fn determinants(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ring = LocalRing::new(5, 3).unwrap();
    let mut group = c.benchmark_group("det");
    for n in [3, 4, 6, 8] {
        let m = random_matrix(&mut rng, ring, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| black_box(m).det()));
    }
    group.finish();
}

fn criteria(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ring = LocalRing::new(5, 2).unwrap();
    let emb = LocalEmbedding::from_generator(&random_matrix(&mut rng, ring, 3)).unwrap();
    c.bench_function("independence n=3", |b| b.iter(|| black_box(&emb).is_optimal_independence().unwrap()));
    c.bench_function("minor n=3", |b| b.iter(|| black_box(&emb).is_optimal_minor().unwrap()));
    c.bench_function("oracle n=3", |b| b.iter(|| black_box(&emb).is_optimal_oracle().unwrap()));
}

fn orbits(c: &mut Criterion) {
    let guards = SizeGuards::default();
    let order = OrderPresentation::from_monic_coeffs(LocalRing::new(3, 2).unwrap(), &[2, 1]).unwrap();
    c.bench_function("enumerate x^2+x+2 over Z/9", |b| {
        b.iter(|| enumerate_embeddings(black_box(&order), &guards).unwrap())
    });
    let candidates = enumerate_embeddings(&order, &guards).unwrap();
    c.bench_function("orbits x^2+x+2 over Z/9", |b| b.iter(|| count_orbits(black_box(&candidates), &guards).unwrap()));
}

fn selectivity(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let instances: Vec<_> = (0..64).map(|_| random_instance(&mut rng)).collect();
    c.bench_function("decide 64 instances", |b| {
        b.iter(|| instances.iter().filter(|i| decide_selectivity(i).unwrap().selective).count())
    });
}

criterion_group!(benches, determinants, criteria, orbits, selectivity);
criterion_main!(benches);
