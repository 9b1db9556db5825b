//! Simulation and pricing laboratory for one-dimensional diffusion market
//! models whose semimartingale decomposition carries a singular component:
//! reflected and skew diffusions, Bessel-type processes, and the corporate
//! funding dynamics that generate such price processes.
//!
//! The crate is organized around six subsystems:
//!
//! * [`paths`] — exact-as-possible path generation on a uniform time grid,
//!   with Skorokhod reflection, local-time tracking, absorption, and
//!   future-infimum enlargement.
//! * [`pricers`] — closed-form and PDE reference prices: Bachelier knock-out
//!   functionals, Black–Scholes barrier calls, Bessel survival probabilities,
//!   and a Crank–Nicolson barrier solver.
//! * [`deflator`] — the minimal-deflator machinery along simulated paths and
//!   the Monte Carlo pricing formulas for markets admitting increasing
//!   profit, strong arbitrage, or arbitrage of the first kind.
//! * [`hedging`] — explicit trading strategies, wealth-process discretization,
//!   and pathwise superreplication verification.
//! * [`funding`] — share schedules under zero-sum constraints, scale/Lamperti
//!   transforms, and repurchase/issuance funding schedules.
//! * [`classify`] — deterministic no-arbitrage and bankruptcy-accessibility
//!   classification of diffusion market models.
//!
//! All stochastic routines are pure functions of `(ModelSpec, TimeGrid,
//! RngSpec)`; batches parallelize with per-path counter-derived streams and
//! reduce in path order, so results are bit-identical regardless of the
//! parallel schedule.

pub mod classify;
pub mod deflator;
pub mod error;
pub mod funding;
pub mod hedging;
pub mod math;
pub mod paths;
pub mod pricers;

pub use error::{ArbError, Result};
