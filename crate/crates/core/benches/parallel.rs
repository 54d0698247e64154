use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rieszlab::harness::desk_model;
use rieszlab::riesz::{Mode, RieszOperator};
use rieszlab::spectral::heat::heat_active;
use rieszlab::spectral::{laplacian, Boundary};
use rieszlab::Exec;

fn policies() -> [(&'static str, Exec); 2] {
    [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)]
}

fn matvec(c: &mut Criterion) {
    let m = desk_model().build(12).unwrap();
    let op = laplacian(&m, Boundary::Dirichlet);
    let x: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut y = vec![0.0; op.dim()];
    let mut g = c.benchmark_group("laplacian_matvec_R12");
    for (name, exec) in policies() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| op.matrix.matvec_with(exec, black_box(&x), &mut y))
        });
    }
    g.finish();
}

fn heat(c: &mut Criterion) {
    let m = desk_model().build(8).unwrap();
    let mut g = c.benchmark_group("heat_t4_R8");
    g.sample_size(10);
    for (name, exec) in policies() {
        let op = laplacian(&m, Boundary::Dirichlet).with_exec(exec);
        let x = op.delta(m.centre.unwrap());
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| heat_active(&op, 4.0, black_box(&x)).unwrap()));
    }
    g.finish();
}

fn riesz(c: &mut Criterion) {
    let m = desk_model().build(8).unwrap();
    let f: Vec<f64> = (0..m.n_vertices())
        .map(|z| if m.boundary[z] { 0.0 } else { ((z * 7919) % 13) as f64 - 6.0 })
        .collect();
    let mut g = c.benchmark_group("riesz_apply_R8");
    g.sample_size(10);
    for (name, exec) in policies() {
        let t = RieszOperator::new(&m, Mode::Quadrature, 1.0, exec).unwrap();
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| t.apply(black_box(&f)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, matvec, heat, riesz);
criterion_main!(benches);
