use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use symtoep::circulant::strang;
use symtoep::multigrid::{GridHierarchy, VCycleConfig};
use symtoep::toeplitz::Symmetrized;
use symtoep::{LinearOperator, MatvecKernel, Preconditioner};
use symtoep_bench::{dense_symbol, fractional, test_vector};

fn toeplitz_products(c: &mut Criterion) {
    let mut group = c.benchmark_group("toeplitz_matvec");
    for n in [255, 1023, 4095] {
        let fft = dense_symbol(n).operator;
        let direct = fft.clone().with_kernel(MatvecKernel::Direct).unwrap();
        let x = test_vector(n);
        group.bench_with_input(BenchmarkId::new("fft", n), &x, |b, x| {
            b.iter(|| fft.matvec(black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("direct", n), &x, |b, x| {
            b.iter(|| direct.matvec(black_box(x)).unwrap())
        });
        let flipped = Symmetrized::new(&fft);
        let mut y = vec![0.0; n];
        group.bench_with_input(BenchmarkId::new("flipped_fft", n), &x, |b, x| {
            b.iter(|| flipped.apply(black_box(x), &mut y))
        });
    }
    group.finish();
}

fn preconditioner_solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("preconditioner_solve");
    for n in [1023, 4095] {
        let op = fractional(n).operator;
        let r = test_vector(n);
        let mut z = vec![0.0; n];
        let circ = strang(&op).unwrap().absolute_value();
        group.bench_with_input(BenchmarkId::new("abs_strang", n), &r, |b, r| {
            b.iter(|| Preconditioner::solve(&circ, black_box(r), &mut z).unwrap())
        });
        let mg = GridHierarchy::build(&op.symmetric_part().unwrap(), VCycleConfig::default()).unwrap();
        group.bench_with_input(BenchmarkId::new("vcycle_sym_part", n), &r, |b, r| {
            b.iter(|| mg.solve(black_box(r), &mut z).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, toeplitz_products, preconditioner_solves);
criterion_main!(benches);
