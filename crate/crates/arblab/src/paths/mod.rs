//! Stochastic model simulation on uniform time grids.
//!
//! Path generation is a pure function of `(ModelSpec, TimeGrid, RngSpec)`;
//! batches parallelize freely and merge by path index.

mod future_inf;
mod grid;
mod local_time;
mod model;
mod rng;
mod sample;
mod simulate;
mod williams;

pub use future_inf::future_infimum;
pub use grid::TimeGrid;
pub use local_time::local_time_estimate;
pub use model::ModelSpec;
pub use rng::RngSpec;
pub use sample::{LocalTimeTrack, SamplePath};
pub use simulate::simulate;
pub use williams::williams_bessel;
