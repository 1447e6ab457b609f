use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ssfem::{block_apply, build_basis, build_cijk, lognormal_sample, smolyak, solve_deterministic, Assembler};
use ssfem_bench::{operator, problem};

fn cijk(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_cijk");
    for (dim, p) in [(3, 3), (4, 3)] {
        let input = build_basis(dim, 2 * p).unwrap();
        let output = build_basis(dim, p).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(format!("L{dim}p{p}")), &(), |b, _| {
            b.iter(|| build_cijk(black_box(&input), black_box(&output)).unwrap())
        });
    }
    g.finish();
}

fn sparse_grid(c: &mut Criterion) {
    let mut g = c.benchmark_group("smolyak");
    for (dim, level) in [(3, 4), (5, 4)] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("d{dim}l{level}")), &(), |b, _| {
            b.iter(|| smolyak(black_box(dim), black_box(level)).unwrap())
        });
    }
    g.finish();
}

fn stiffness(c: &mut Criterion) {
    let mesh = problem(64, 3, 3).build_mesh().unwrap();
    let asm = Assembler::new(&mesh).unwrap();
    let coeff = vec![1.3; mesh.num_nodes()];
    c.bench_function("stiffness_64x64", |b| b.iter(|| asm.stiffness(black_box(&coeff)).unwrap()));
}

fn coupled_apply(c: &mut Criterion) {
    let (_, op) = operator(&problem(24, 3, 3)).unwrap();
    let x: Vec<f64> = (0..op.block_size() * op.num_blocks()).map(|i| (i as f64 * 0.37).sin()).collect();
    c.bench_function("block_apply_24x24_L3p3", |b| b.iter(|| block_apply(&op, black_box(&x)).unwrap()));
}

fn sample_solve(c: &mut Criterion) {
    let cfg = problem(24, 3, 3);
    let mesh = cfg.build_mesh().unwrap();
    let modes = cfg.gaussian_modes(&mesh).unwrap();
    let coeff = lognormal_sample(&modes, &[0.5, -1.0, 0.25]).unwrap();
    c.bench_function("nisp_sample_solve_24x24", |b| {
        b.iter(|| solve_deterministic(&mesh, black_box(&coeff), 1.0).unwrap())
    });
}

criterion_group!(benches, cijk, sparse_grid, stiffness, coupled_apply, sample_solve);
criterion_main!(benches);
