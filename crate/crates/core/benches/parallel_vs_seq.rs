//! Rayon fan-out versus the sequential fallback on representative batches:
//! an equilibrium R-sweep and a stability-probe battery.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wilhelmy::geometry::{make_grid, ContainerRatio, Grading, Params};
use wilhelmy::parallel::{map_batch, map_batch_seq};
use wilhelmy::solver::probe::stability_probe;
use wilhelmy::solver::{solve_equilibrium, EquilibriumMode, SolverOptions};

fn params(r: f64) -> Params {
    Params {
        d: 3,
        g: 1.0,
        cos_yp: 0.5,
        cos_yc: 0.3,
        mu_plus: 0.2,
        mu_minus: 0.2,
        r: ContainerRatio::Finite(r),
        ..Params::default()
    }
}

fn bench_equilibrium_sweep(c: &mut Criterion) {
    // sized like the container-limit sweep: one independent solve per radius
    let radii: Vec<f64> = vec![4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0];
    let opts = SolverOptions::default();
    let solve_one = |&r: &f64| {
        let p = params(r);
        let grid = make_grid(&p, 512, Grading::BoundaryRefined).unwrap();
        solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts)
            .unwrap()
            .lambda
    };

    let mut group = c.benchmark_group("equilibrium_sweep");
    group.bench_with_input(BenchmarkId::new("rayon", radii.len()), &radii, |b, rs| {
        b.iter(|| map_batch(rs, solve_one))
    });
    group.bench_with_input(BenchmarkId::new("seq", radii.len()), &radii, |b, rs| {
        b.iter(|| map_batch_seq(rs, solve_one))
    });
    group.finish();
}

fn bench_probe_battery(c: &mut Criterion) {
    let p = params(8.0);
    let opts = SolverOptions::default();
    let grid = make_grid(&p, 256, Grading::BoundaryRefined).unwrap();
    let state = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::Band { l_prev: 0.0 }, &opts)
        .unwrap();

    let mut group = c.benchmark_group("stability_probe");
    // the probe itself fans out through map_batch; compiled with the parallel
    // feature this exercises the rayon path
    group.bench_function("battery", |b| {
        b.iter(|| stability_probe(&state, &p).unwrap().min_margin)
    });
    group.finish();
}

criterion_group!(benches, bench_equilibrium_sweep, bench_probe_battery);
criterion_main!(benches);
