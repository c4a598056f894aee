//! 3D finite-difference stencil kernel with tiled and untiled traversals.

mod grid;
mod kernel;

pub use grid::{BlockSize, Grid3D, ProblemSize, SourceTerm, Velocity, STENCIL_RADIUS};
pub use kernel::{run_iterations, tiles, Tile, LAPLACIAN_COEFFS};
