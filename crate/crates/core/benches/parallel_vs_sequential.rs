//! Parallel against sequential execution of the two heaviest kernels:
//! assembling the discrete frame operator and scanning kernel localization.
//! Build with `--no-default-features` to see the pure sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sphframes::exec;
use sphframes::families::{make_family, FamilyKind};
use sphframes::frames::{make_scales, FrameSystem, ScaleKind};
use sphframes::kernel::{kernel_localization_scan, KernelScanParams, KernelSpec};
use sphframes::sphere::{build_phase_grid, sample_uniform, LevelSpec, Placement, PrecisionProfile};
use sphframes::Dimension;

fn frame_operator(c: &mut Criterion) {
    let dim = Dimension::new(2).unwrap();
    let family = make_family(FamilyKind::Poisson { m: 3 }, dim).unwrap();
    let scales = make_scales(&ScaleKind::Geometric {
        b0: 1.0,
        q: 0.9,
        count: 25,
    })
    .unwrap();
    let grid = build_phase_grid(
        dim,
        &scales,
        &LevelSpec::Uniform(2),
        Placement::Center,
        PrecisionProfile::Fast,
    )
    .unwrap();
    let centers = sample_uniform(dim, 240, 7).unwrap();
    let mut group = c.benchmark_group("frame_operator");
    group.sample_size(10);
    let run = || FrameSystem::assemble(&family, &grid, 10, centers.clone()).unwrap();
    group.bench_function(BenchmarkId::new("assemble", "parallel"), |b| b.iter(run));
    group.bench_function(BenchmarkId::new("assemble", "sequential"), |b| {
        b.iter(|| exec::sequential(run))
    });
    group.finish();
}

fn localization(c: &mut Criterion) {
    let spec = KernelSpec::new(Dimension::new(2).unwrap(), 3).unwrap();
    let params = KernelScanParams {
        scales_per_decade: 3,
        angles_per_decade: 12,
        ..Default::default()
    };
    let mut group = c.benchmark_group("kernel_scan");
    group.sample_size(10);
    let run = || kernel_localization_scan(&spec, &params).unwrap();
    group.bench_function(BenchmarkId::new("scan", "parallel"), |b| b.iter(run));
    group.bench_function(BenchmarkId::new("scan", "sequential"), |b| {
        b.iter(|| exec::sequential(run))
    });
    group.finish();
}

criterion_group!(benches, frame_operator, localization);
criterion_main!(benches);
