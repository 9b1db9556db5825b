//! First-passage/rebound decomposition paths.

use crate::error::Result;
use crate::paths::grid::TimeGrid;
use crate::paths::model::ModelSpec;
use crate::paths::rng::RngSpec;
use crate::paths::sample::SamplePath;
use crate::paths::simulate::simulate;

/// Simulate the decomposition path: Brownian motion from `x0` stopped at its
/// first hit of `j`, then `j` plus a Bessel(3) rebound started at 0. The
/// first-passage index is recorded in `singular_marker`.
pub fn williams_bessel(x0: f64, j: f64, grid: &TimeGrid, rng: &RngSpec) -> Result<SamplePath> {
    let model = ModelSpec::WilliamsBessel { x0, j };
    simulate(&model, grid, rng)
}
