use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qscissor::circuit::{fock_amplitude, permanent, qft_unitary};
use qscissor::scissor::run_two_scissor;
use qscissor::sensitivity::{LossLayout, LossyGainModel};
use qscissor::{Complex64, HeraldPattern, MixedState, OccupationVector, PureState};

fn bench_permanent(c: &mut Criterion) {
    let mut group = c.benchmark_group("permanent");
    for n in [3usize, 6, 9, 12] {
        let a: Vec<Complex64> = (0..n * n)
            .map(|k| Complex64::from_polar(1.0 / (1.0 + k as f64).sqrt(), 0.7 * k as f64))
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| permanent(black_box(a), n)));
    }
    group.finish();
}

fn bench_fock_amplitude(c: &mut Criterion) {
    let u = qft_unitary(3).unwrap();
    let n_in = OccupationVector::from([2, 1, 1]);
    let n_out = OccupationVector::from([1, 1, 2]);
    c.bench_function("fock_amplitude qft3 4 photons", |b| {
        b.iter(|| fock_amplitude(black_box(&u), black_box(&n_in), black_box(&n_out)).unwrap())
    });
}

fn bench_scissor(c: &mut Criterion) {
    let coeffs = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.8, 0.0)];
    let input = MixedState::pure(PureState::single_mode(&coeffs, 4).unwrap()).unwrap();
    let pattern = HeraldPattern::new([1, 0, 1]);
    c.bench_function("run_two_scissor", |b| b.iter(|| run_two_scissor(black_box(&input), 2.0, &pattern).unwrap()));
}

fn bench_lossy_gain(c: &mut Criterion) {
    let model = LossyGainModel::new(LossLayout::default()).unwrap();
    let losses = vec![0.1; model.layout().dim()];
    c.bench_function("lossy_gain_model", |b| b.iter(|| model.gain(2.0, 0.05, black_box(&losses)).unwrap()));
}

criterion_group!(benches, bench_permanent, bench_fock_amplitude, bench_scissor, bench_lossy_gain);
criterion_main!(benches);
