use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qpfe_core::channels::{apply_via_choi, choi_of_channel, post_select_exact, KrausChannel};
use qpfe_core::clifford::{random_clifford, CliffordOp, CmCircuit};
use qpfe_core::harness::experiment_encrypted;
use qpfe_core::harness::ExperimentInputs;
use qpfe_core::idealfunc::Scheme2Layout;
use qpfe_core::protocol::{scheme2_run, AdversarySpec, Mode, Scheme2Instance};
use qpfe_core::qmat::random::random_density;
use qpfe_core::qmat::DensityMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn clifford(c: &mut Criterion) {
    let mut g = c.benchmark_group("clifford");
    for n in [1, 3, 5] {
        g.bench_with_input(BenchmarkId::new("sample", n), &n, |b, &n| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            b.iter(|| random_clifford(n, &mut rng));
        });
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (x, y) = (random_clifford(n, &mut rng), random_clifford(n, &mut rng));
        g.bench_with_input(BenchmarkId::new("compose", n), &n, |b, _| b.iter(|| x.compose(black_box(&y))));
        let rho = random_density(n, 2, &mut rng);
        g.bench_with_input(BenchmarkId::new("apply", n), &n, |b, _| b.iter(|| x.apply(black_box(&rho))));
    }
    g.finish();
}

fn channels(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let channel = KrausChannel::random(2, 2, 3, &mut rng);
    let choi = choi_of_channel(&channel);
    let rho = random_density(2, 2, &mut rng);
    c.bench_function("choi/apply_2q", |b| b.iter(|| apply_via_choi(&choi, black_box(&rho))));
    let (ra, rb) = (random_density(1, 1, &mut rng), random_density(1, 1, &mut rng));
    c.bench_function("post_select/exact_2q", |b| b.iter(|| post_select_exact(&choi, &ra, &rb)));
}

fn scheme2(c: &mut Criterion) {
    let mut g = c.benchmark_group("scheme2_exact");
    g.sample_size(20);
    for lambda in [0, 2, 4] {
        let inst = Scheme2Instance {
            layout: Scheme2Layout { n_a: 1, n_b: 1, m_a: 1, k: 0, lambda },
            q: CmCircuit::single(CliffordOp::cnot(2, 1, 0).unwrap(), 0).unwrap(),
            x_a: DensityMatrix::named("+").unwrap(),
            x_b: DensityMatrix::named("1").unwrap(),
        };
        g.bench_with_input(BenchmarkId::from_parameter(lambda), &lambda, |b, _| {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            b.iter(|| scheme2_run(&inst, &AdversarySpec::honest(), Mode::Exact, &mut rng).unwrap());
        });
    }
    g.finish();
}

fn experiment(c: &mut Criterion) {
    let inputs = ExperimentInputs::all()[3];
    c.bench_function("experiment/1024_shots", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        b.iter(|| experiment_encrypted(inputs, None, 1024, &mut rng).unwrap());
    });
}

criterion_group!(benches, clifford, channels, scheme2, experiment);
criterion_main!(benches);
