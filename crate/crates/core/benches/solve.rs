use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hypoell::exec::Execution;
use hypoell::mixedfft::Transforms;
use hypoell::solve::{solve, SolveOptions};
use hypoell::{CylinderGrid, Field, OperatorSpec, TorusFunction, C64};

fn rhs(grid: CylinderGrid) -> Field {
    Field::from_fn(grid, |t, x| C64::from_polar((-x * x / 2.0).exp(), t + 0.5 * t.sin()))
}

fn per_frequency_solves(c: &mut Criterion) {
    let i = C64::new(0.0, 1.0);
    let cases = [
        (
            "nonvanishing_b",
            OperatorSpec::new(
                TorusFunction::constant(i).add(&TorusFunction::sin(1).scale(i)),
                TorusFunction::constant(i * 0.5),
            ),
            false,
        ),
        (
            "connected_sublevel",
            OperatorSpec::new(TorusFunction::sin(1).scale(i), TorusFunction::zero()),
            true,
        ),
    ];
    for n_x in [128usize, 512] {
        let grid = CylinderGrid::new(64, n_x, 20.0).unwrap();
        let f = rhs(grid);
        for (name, op, project) in &cases {
            let mut group = c.benchmark_group(format!("solve/{name}"));
            group.sample_size(10);
            for exec in [Execution::Sequential, Execution::Parallel] {
                let opts = SolveOptions {
                    exec,
                    project: *project,
                    ..SolveOptions::default()
                };
                group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n_x), &f, |b, f| {
                    b.iter(|| solve(op, f, &opts).unwrap())
                });
            }
            group.finish();
        }
    }
}

fn transforms(c: &mut Criterion) {
    let grid = CylinderGrid::new(256, 1024, 20.0).unwrap();
    let f = rhs(grid);
    let mut group = c.benchmark_group("mixed_transform");
    for exec in [Execution::Sequential, Execution::Parallel] {
        let tr = Transforms::new(grid, exec);
        group.bench_function(format!("{exec:?}"), |b| b.iter(|| tr.mixed(&f).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, per_frequency_solves, transforms);
criterion_main!(benches);
