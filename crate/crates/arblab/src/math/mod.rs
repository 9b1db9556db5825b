//! Numerical building blocks: Gaussian functions, adaptive quadrature,
//! Brownian-bridge corrections, a tridiagonal solver, and streaming
//! statistics with deterministic reduction order.

pub mod bridge;
pub mod gauss;
pub mod quad;
pub mod stats;
pub mod tridiag;

pub use bridge::{bridge_crossing_prob, sample_bridge_min};
pub use gauss::{bachelier_call_core, norm_cdf, norm_pdf, pdf_var};
pub use quad::integrate;
pub use stats::MeanVar;
pub use tridiag::solve_tridiagonal;
