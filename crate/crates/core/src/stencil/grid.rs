//! Grid geometry and field state for the 3D wave kernel.
//!
//! The interior of a [`Grid3D`] is `s_i x s_j x s_k` points surrounded by a
//! halo of [`STENCIL_RADIUS`] cells per side. The k dimension is contiguous
//! in memory, so the innermost loop of every traversal is unit-stride.
//! Halo cells hold the boundary value (zero) and are never written.

use crate::error::Error;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Halo width of the spatial stencil: five neighbour points per direction.
pub const STENCIL_RADIUS: usize = 5;

/// Interior grid extents, excluding the halo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSize {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl ProblemSize {
    pub fn new(i: usize, j: usize, k: usize) -> Result<Self, Error> {
        if i == 0 || j == 0 || k == 0 {
            return Err(Error::InvalidProblemSize(i, j, k));
        }
        Ok(Self { i, j, k })
    }

    /// Total number of interior points.
    pub fn points(&self) -> u64 {
        self.i as u64 * self.j as u64 * self.k as u64
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.i, self.j, self.k]
    }
}

impl fmt::Display for ProblemSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.i, self.j, self.k)
    }
}

impl FromStr for ProblemSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [i, j, k] = parse_triple(s)?;
        ProblemSize::new(i, j, k).map_err(|e| e.to_string())
    }
}

/// Tile extents per dimension for the blocked traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSize {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl BlockSize {
    pub fn new(i: usize, j: usize, k: usize) -> Result<Self, Error> {
        if i == 0 || j == 0 || k == 0 {
            return Err(Error::InvalidBlockSize(i, j, k));
        }
        Ok(Self { i, j, k })
    }

    /// Check `1 <= b_l <= S_l` against a concrete problem size.
    pub fn validate_for(&self, size: &ProblemSize) -> Result<(), Error> {
        let reject = |dim| Error::BlockExceedsSize {
            block: *self,
            size: *size,
            dim,
        };
        if self.i == 0 || self.j == 0 || self.k == 0 {
            return Err(Error::InvalidBlockSize(self.i, self.j, self.k));
        }
        if self.i > size.i {
            return Err(reject('i'));
        }
        if self.j > size.j {
            return Err(reject('j'));
        }
        if self.k > size.k {
            return Err(reject('k'));
        }
        Ok(())
    }

    /// Number of tiles a full sweep visits: `ceil(S_l / b_l)` per dimension.
    pub fn tile_count(&self, size: &ProblemSize) -> u64 {
        let ceil = |s: usize, b: usize| s.div_ceil(b) as u64;
        ceil(size.i, self.i) * ceil(size.j, self.j) * ceil(size.k, self.k)
    }

    /// The degenerate single-tile block covering the whole interior.
    pub fn full(size: &ProblemSize) -> Self {
        Self {
            i: size.i,
            j: size.j,
            k: size.k,
        }
    }
}

impl fmt::Display for BlockSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.i, self.j, self.k)
    }
}

impl FromStr for BlockSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [i, j, k] = parse_triple(s)?;
        BlockSize::new(i, j, k).map_err(|e| e.to_string())
    }
}

fn parse_triple(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected IxJxK, got `{s}`"));
    }
    let mut out = [0usize; 3];
    for (slot, text) in out.iter_mut().zip(&parts) {
        *slot = text
            .trim()
            .parse()
            .map_err(|_| format!("`{text}` is not a positive integer"))?;
    }
    Ok(out)
}

/// Wave speed: either one scalar for the whole grid or a per-cell field.
#[derive(Debug, Clone)]
pub enum Velocity {
    Uniform(f64),
    /// Per-cell values, laid out like the field arrays (halo included).
    Field(Vec<f64>),
}

/// A point source injected into the field after each update.
///
/// The pulse is a Ricker wavelet centred at `1 / peak_frequency` so the
/// field starts quiet and receives one dominant wavelength.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceTerm {
    location: (usize, usize, usize),
    peak_frequency: f64,
    amplitude: f64,
}

impl SourceTerm {
    /// `location` is an interior coordinate triple (`0 <= loc_l < s_l`).
    pub fn new(
        location: (usize, usize, usize),
        peak_frequency: f64,
        amplitude: f64,
        size: &ProblemSize,
    ) -> Result<Self, Error> {
        let (i, j, k) = location;
        if i >= size.i || j >= size.j || k >= size.k {
            return Err(Error::SourceOutsideInterior(i, j, k));
        }
        Ok(Self {
            location,
            peak_frequency,
            amplitude,
        })
    }

    /// A unit-amplitude source at the interior centre.
    pub fn centered(size: &ProblemSize) -> Self {
        Self {
            location: (size.i / 2, size.j / 2, size.k / 2),
            peak_frequency: 10.0,
            amplitude: 1.0,
        }
    }

    pub fn location(&self) -> (usize, usize, usize) {
        self.location
    }

    /// Ricker pulse value at time-step `step` (physical time `step * dt`).
    pub fn value_at(&self, step: usize, dt: f64) -> f64 {
        let delay = 1.0 / self.peak_frequency;
        let tau = step as f64 * dt - delay;
        let arg = std::f64::consts::PI.powi(2) * self.peak_frequency.powi(2) * tau * tau;
        self.amplitude * (1.0 - 2.0 * arg) * (-arg).exp()
    }
}

/// Two-time-level 3D field with halo.
#[derive(Debug, Clone)]
pub struct Grid3D {
    size: ProblemSize,
    ext: [usize; 3],
    u_curr: Vec<f64>,
    u_prev: Vec<f64>,
    velocity: Velocity,
    dt: f64,
    dx: f64,
}

impl Grid3D {
    /// Zero-initialised grid with uniform unit velocity.
    pub fn new(size: ProblemSize, dt: f64, dx: f64) -> Result<Self, Error> {
        if !dt.is_finite() || !dx.is_finite() || dt <= 0.0 || dx <= 0.0 {
            return Err(Error::InvalidSteps { dt, dx });
        }
        let ext = [
            size.i + 2 * STENCIL_RADIUS,
            size.j + 2 * STENCIL_RADIUS,
            size.k + 2 * STENCIL_RADIUS,
        ];
        let cells = ext[0] * ext[1] * ext[2];
        Ok(Self {
            size,
            ext,
            u_curr: vec![0.0; cells],
            u_prev: vec![0.0; cells],
            velocity: Velocity::Uniform(1.0),
            dt,
            dx,
        })
    }

    pub fn with_velocity(mut self, velocity: Velocity) -> Result<Self, Error> {
        if let Velocity::Field(field) = &velocity {
            let expected = self.u_curr.len();
            if field.len() != expected {
                return Err(Error::VelocityFieldShape {
                    got: field.len(),
                    expected,
                });
            }
        }
        self.velocity = velocity;
        Ok(self)
    }

    pub fn size(&self) -> ProblemSize {
        self.size
    }

    pub fn radius(&self) -> usize {
        STENCIL_RADIUS
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub(crate) fn extents(&self) -> [usize; 3] {
        self.ext
    }

    pub(crate) fn fields_mut(&mut self) -> (&[f64], &mut [f64], &Velocity) {
        (&self.u_curr, &mut self.u_prev, &self.velocity)
    }

    pub(crate) fn swap_levels(&mut self) {
        std::mem::swap(&mut self.u_curr, &mut self.u_prev);
    }

    /// Flat array index of an interior coordinate.
    pub(crate) fn index(&self, i: usize, j: usize, k: usize) -> usize {
        ((i + STENCIL_RADIUS) * self.ext[1] + (j + STENCIL_RADIUS)) * self.ext[2]
            + (k + STENCIL_RADIUS)
    }

    /// Current field value at an interior coordinate.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.u_curr[self.index(i, j, k)]
    }

    /// Set the current field at an interior coordinate (halo stays zero).
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.index(i, j, k);
        self.u_curr[idx] = value;
    }

    /// Current time level including the halo.
    pub fn current(&self) -> &[f64] {
        &self.u_curr
    }

    /// Previous time level including the halo.
    pub fn previous(&self) -> &[f64] {
        &self.u_prev
    }

    pub fn max_abs(&self) -> f64 {
        self.u_curr.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
