//! Shared fixtures for the benchmark suite.

use stencil_tune_core::exec::{ExecMode, Executor};
use stencil_tune_core::model::CostModelParams;
use stencil_tune_core::stencil::{Grid3D, ProblemSize, SourceTerm};
use stencil_tune_core::topology::Topology;

/// A driven 64x64x128 grid, the kernel benchmark workload.
pub fn step_fixture() -> (Grid3D, SourceTerm) {
    let size = ProblemSize::new(64, 64, 128).unwrap();
    let source = SourceTerm::centered(&size);
    (Grid3D::new(size, 0.001, 1.0).unwrap(), source)
}

/// A model-mode executor over `nodes x cores` workers on a 64^3 grid.
pub fn model_executor(nodes: usize, cores: usize) -> Executor {
    let params = CostModelParams::default();
    Executor::new(
        Topology::new(nodes, cores)
            .unwrap()
            .with_shared_cache_bytes(params.cache_bytes),
        ProblemSize::new(64, 64, 64).unwrap(),
        5,
        ExecMode::Model(params),
    )
    .unwrap()
}
