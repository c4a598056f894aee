//! Kernel throughput at representative blocksizes.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use stencil_tune_bench::step_fixture;
use stencil_tune_core::stencil::BlockSize;

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(20);

    group.bench_function("untiled", |b| {
        let (mut grid, source) = step_fixture();
        let mut step = 0;
        b.iter(|| {
            grid.step_untiled(Some(&source), step);
            step += 1;
            black_box(grid.max_abs())
        });
    });

    for block in ["64x64x128", "8x8x128", "16x16x64", "4x4x128", "64x64x8"] {
        let block: BlockSize = block.parse().unwrap();
        group.bench_with_input(BenchmarkId::new("tiled", block), &block, |b, &block| {
            let (mut grid, source) = step_fixture();
            let mut step = 0;
            b.iter(|| {
                grid.step_tiled(block, Some(&source), step).unwrap();
                step += 1;
                black_box(grid.max_abs())
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_step);
criterion_main!(benches);
